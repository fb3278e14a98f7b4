#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "spikemix/error.hpp"

namespace {

using nlohmann::json;
using namespace spikemix;

void print_json(const json& j) { std::cout << j.dump() << std::endl; }

int report_error(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
  return code;
}

std::vector<cli::VarianceMethod> parse_methods(const std::string& s) {
  if (s == "bpf") return {cli::VarianceMethod::bpf};
  if (s == "csmc") return {cli::VarianceMethod::csmc};
  if (s == "both") return {cli::VarianceMethod::bpf, cli::VarianceMethod::csmc};
  throw ConfigError("--method must be bpf, csmc or both");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian clustering of count time series with state-space mixtures"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a labelled synthetic dataset");
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--config", sim_config, "Simulation config JSON");
  sim->add_option("--out", sim_out, "Output dataset JSON")->required();
  sim->add_option("--seed", sim_seed, "Random seed (overrides the config)");

  // infer
  auto* infer = app.add_subcommand("infer", "Run the Gibbs sampler and stream a trace");
  cli::InferOptions io_opts;
  std::string infer_data, infer_config, infer_out;
  std::optional<int> infer_iterations;
  infer->add_option("--data", infer_data, "Dataset JSON");
  infer->add_option("--config", infer_config, "Run config JSON");
  infer->add_option("--out", infer_out, "Trace output (NDJSON)");
  infer->add_option("--seed", io_opts.seed, "Random seed (overrides the config)");
  infer->add_option("--workers", io_opts.workers, "Concurrent filter evaluations")->check(CLI::PositiveNumber);
  infer->add_option("--iterations", infer_iterations, "Number of sweeps (overrides the config)")
      ->check(CLI::PositiveNumber);

  // select
  auto* sel = app.add_subcommand("select", "Pick the representative clustering from a trace");
  cli::SelectOptions sel_opts;
  std::string sel_trace, sel_out, sel_matrix;
  sel->add_option("--trace,--data", sel_trace, "Trace file")->required();
  sel->add_option("--burnin", sel_opts.burn_in, "Samples to discard (default: the trace's burn_in)");
  sel->add_option("--out", sel_out, "Clustering JSON")->required();
  sel->add_option("--matrix", sel_matrix, "Mean co-occurrence CSV");

  // bench-variance
  auto* bench = app.add_subcommand("bench-variance", "Compare estimator variance of BPF and cSMC");
  cli::VarianceOptions var_opts;
  std::string bench_data, bench_out, bench_method = "both";
  bench->add_option("--data", bench_data, "Dataset JSON")->required();
  bench->add_option("--series", var_opts.series, "Series index");
  bench->add_option("--grid-mu", var_opts.grid_mu, "Comma-separated mu values")->delimiter(',');
  bench->add_option("--grid-logpsi", var_opts.grid_log_psi, "Comma-separated log psi values")->delimiter(',');
  bench->add_option("--reps", var_opts.replicates, "Replicates per grid point");
  bench->add_option("--method", bench_method, "bpf, csmc or both");
  bench->add_option("--seed", var_opts.seed, "Random seed");
  bench->add_option("--bpf-particles", var_opts.bpf_particles, "BPF particle count");
  bench->add_option("--csmc-particles", var_opts.csmc_particles, "cSMC particle count");
  bench->add_option("--rounds", var_opts.csmc_rounds, "cSMC policy refinement rounds");
  bench->add_flag("--identical-seeds", var_opts.identical_seeds, "Reuse one stream for every replicate");
  bench->add_option("--out", bench_out, "CSV output (default: stdout)");

  // oracle-loglik
  auto* orc = app.add_subcommand("oracle-loglik", "Grid-quadrature log-likelihood of one series");
  cli::OracleOptions orc_opts;
  std::string orc_data;
  orc->add_option("--data", orc_data, "Dataset JSON")->required();
  orc->add_option("--series", orc_opts.series, "Series index");
  orc->add_option("--mu", orc_opts.mu, "Drift mu");
  orc->add_option("--log-psi", orc_opts.log_psi, "Log random-walk variance");
  orc->add_option("--points", orc_opts.points, "Grid points");
  orc->add_option("--grid-lo", orc_opts.grid_lo, "Lower edge of the state grid");
  orc->add_option("--grid-hi", orc_opts.grid_hi, "Upper edge of the state grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), 1);
  }

  try {
    if (*sim) {
      std::optional<cli::fs::path> config;
      if (!sim_config.empty()) config = sim_config;
      const Dataset ds = cli::cmd_simulate(config, sim_out, sim_seed);
      print_json({{"out", sim_out}, {"series", ds.series.size()}});
    } else if (*infer) {
      if (!infer_data.empty()) io_opts.data = infer_data;
      if (!infer_config.empty()) io_opts.config = infer_config;
      if (!infer_out.empty()) io_opts.out = infer_out;
      io_opts.iterations = infer_iterations;
      const auto summary = cli::cmd_infer(io_opts);
      print_json({{"out", summary.trace_path.string()},
                  {"records", summary.records},
                  {"final_clusters", summary.final_clusters}});
    } else if (*sel) {
      sel_opts.trace = sel_trace;
      sel_opts.out = sel_out;
      if (!sel_matrix.empty()) sel_opts.matrix = sel_matrix;
      const auto report = cli::cmd_select(sel_opts);
      print_json({{"out", sel_out},
                  {"clusters", report.selection.params.size()},
                  {"source_iter", report.selection.source_index},
                  {"tie_count", report.selection.tie_count}});
    } else if (*bench) {
      var_opts.data = bench_data;
      var_opts.methods = parse_methods(bench_method);
      if (!bench_out.empty()) var_opts.out = bench_out;
      const auto rows = cli::cmd_bench_variance(var_opts);
      if (bench_out.empty()) std::cout << cli::variance_csv(rows);
    } else if (*orc) {
      orc_opts.data = orc_data;
      const double ll = cli::cmd_oracle_loglik(orc_opts);
      json out{{"series", orc_opts.series}, {"mu", orc_opts.mu}, {"log_psi", orc_opts.log_psi},
               {"points", orc_opts.points}};
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", ll);
      out["log_likelihood"] = std::stod(buf);
      print_json(out);
    }
  } catch (const NumericalError& e) {
    return report_error("numerical", e.what(), 2);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), 1);
  } catch (const std::invalid_argument& e) {
    return report_error("config", e.what(), 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("numerical", e.what(), 2);
  }
  return 0;
}
