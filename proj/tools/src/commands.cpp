#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "spikemix/error.hpp"
#include "spikemix/oracle.hpp"
#include "spikemix/postsel.hpp"
#include "spikemix/smc.hpp"

namespace spikemix::cli {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPIKEMIX_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096)
      throw ConfigError(std::string("SPIKEMIX_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Dataset cmd_simulate(const std::optional<fs::path>& config, const fs::path& out,
                     std::optional<std::uint64_t> seed) {
  io::SimulateConfig cfg;
  if (config) cfg = io::read_simulate_config(*config);
  if (seed) cfg.seed = *seed;
  const Dataset ds = generate_synthetic(cfg.sim, cfg.seed);
  io::write_dataset(ds, out);
  return ds;
}

namespace {

const Dataset& checked_series_index(const Dataset& ds, int series) {
  if (series < 0 || static_cast<std::size_t>(series) >= ds.series.size())
    throw ConfigError("series index " + std::to_string(series) + " out of range (dataset has " +
                      std::to_string(ds.series.size()) + " series)");
  return ds;
}

ClusterParams checked_theta(double mu, double log_psi) {
  const ClusterParams theta{mu, log_psi};
  try {
    validate(theta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return theta;
}

}  // namespace

InferSummary cmd_infer(const InferOptions& opts) {
  io::RunConfig cfg;
  if (opts.config) cfg = io::read_run_config(*opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.iterations) {
    cfg.hyper.iterations = *opts.iterations;
    cfg.hyper.burn_in = std::min(cfg.hyper.burn_in, std::max(0, *opts.iterations - 1));
    try {
      validate(cfg.hyper);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const fs::path data_path = opts.data ? *opts.data : fs::path(cfg.data_path);
  const fs::path out_path = opts.out ? *opts.out : fs::path(cfg.out_path);
  if (data_path.empty()) throw ConfigError("no dataset given (--data or config 'data')");
  if (out_path.empty()) throw ConfigError("no trace output given (--out or config 'out')");

  const Dataset ds = io::read_dataset(data_path);
  if (cfg.domain && *cfg.domain != ds.domain)
    throw ConfigError("config domain '" + std::string(to_string(*cfg.domain)) +
                      "' does not match dataset domain '" + std::string(to_string(ds.domain)) + "'");
  std::vector<SeriesObservations> data = ds.observations();
  if (cfg.psi0)
    for (auto& s : data) s.config.psi0 = *cfg.psi0;

  const int workers = resolve_workers(opts.workers.value_or(cfg.workers));
  const SamplerContext ctx(data, cfg.hyper, {}, workers);
  const GibbsState init = default_initial_state(data.size(), cfg.hyper, derive_seed({cfg.seed, 0x494e4954}));

  io::TraceHeader header;
  header.seed = cfg.seed;
  header.hyper = cfg.hyper;
  for (const auto& s : ds.series) header.series_ids.push_back(s.id);
  io::TraceWriter writer(out_path, header);

  InferSummary summary;
  summary.trace_path = out_path;
  gibbs_run(ctx, init, cfg.seed, [&](const GibbsSample& sample) {
    writer.write(sample);
    summary.final_clusters = sample.state.num_clusters();
  });
  summary.records = static_cast<int>(writer.records());
  return summary;
}

io::ClusteringReport cmd_select(const SelectOptions& opts) {
  const io::TraceFile file = io::read_trace(opts.trace);
  const int I = static_cast<int>(file.samples.size());
  const int burn_in = opts.burn_in.value_or(std::min(file.header.hyper.burn_in, std::max(0, I - 1)));
  if (burn_in < 0 || burn_in >= I)
    throw ConfigError("burn-in " + std::to_string(burn_in) + " must be in [0, " + std::to_string(I) +
                      ") for a trace of " + std::to_string(I) + " samples");

  io::ClusteringReport report;
  report.selection = select(std::span<const GibbsSample>(file.samples), burn_in);
  report.series_ids = file.header.series_ids;
  report.burn_in = burn_in;
  report.samples = I;
  io::write_clustering(report, opts.out);
  if (opts.matrix)
    io::write_cooccurrence_csv(mean_cooccurrence(std::span<const GibbsSample>(file.samples), burn_in),
                               file.header.series_ids, *opts.matrix);
  return report;
}

std::string to_string(VarianceMethod m) { return m == VarianceMethod::bpf ? "bpf" : "csmc"; }

std::vector<VarianceRow> cmd_bench_variance(const VarianceOptions& opts) {
  if (opts.replicates < 2) throw ConfigError("replicates must be >= 2");
  if (opts.grid_mu.empty() || opts.grid_log_psi.empty()) throw ConfigError("empty variance grid");
  if (opts.methods.empty()) throw ConfigError("no method selected");
  if (opts.bpf_particles < 2 || opts.csmc_particles < 2 || opts.csmc_rounds < 1)
    throw ConfigError("particle counts must be >= 2 and rounds >= 1");
  const Dataset ds = io::read_dataset(opts.data);
  checked_series_index(ds, opts.series);
  const SeriesObservations series = ds.observations(static_cast<std::size_t>(opts.series));

  std::vector<VarianceRow> rows;
  std::uint64_t point = 0;
  for (double mu : opts.grid_mu) {
    for (double log_psi : opts.grid_log_psi) {
      const ClusterParams theta = checked_theta(mu, log_psi);
      for (VarianceMethod method : opts.methods) {
        VarianceRow row;
        row.mu = mu;
        row.log_psi = log_psi;
        row.method = method;
        row.replicates = opts.replicates;
        row.particles = method == VarianceMethod::bpf ? opts.bpf_particles : opts.csmc_particles;
        row.rounds = method == VarianceMethod::bpf ? 0 : opts.csmc_rounds;

        std::vector<double> estimates;
        estimates.reserve(opts.replicates);
        const auto start = std::chrono::steady_clock::now();
        for (int r = 0; r < opts.replicates; ++r) {
          const std::uint64_t rep = opts.identical_seeds ? 0 : static_cast<std::uint64_t>(r);
          const std::uint64_t stream =
              derive_seed({opts.seed, point, static_cast<std::uint64_t>(method), rep});
          LikelihoodEstimate est;
          if (method == VarianceMethod::bpf) {
            Rng rng(stream);
            est = bpf(series, theta, opts.bpf_particles, rng).estimate;
          } else {
            est = csmc(series, theta, {opts.csmc_particles, opts.csmc_rounds, false}, stream).estimate;
          }
          if (est.degenerate) ++row.degenerate;
          estimates.push_back(est.log_likelihood);
        }
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        row.ms_per_eval = elapsed / opts.replicates;
        double sum = 0.0;
        for (double e : estimates) sum += e;
        row.mean = sum / opts.replicates;
        double ss = 0.0;
        for (double e : estimates) ss += (e - row.mean) * (e - row.mean);
        row.variance = ss / (opts.replicates - 1);
        rows.push_back(row);
      }
      ++point;
    }
  }
  if (opts.out) io::write_text(*opts.out, variance_csv(rows));
  return rows;
}

std::string variance_csv(const std::vector<VarianceRow>& rows) {
  std::string out = "mu,log_psi,method,particles,rounds,replicates,mean,variance,ms_per_eval,degenerate\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%d,%d,%d,%.17g,%.17g,%.6f,%d\n", r.mu, r.log_psi,
                  to_string(r.method).c_str(), r.particles, r.rounds, r.replicates, r.mean, r.variance,
                  r.ms_per_eval, r.degenerate);
    out += buf;
  }
  return out;
}

double cmd_oracle_loglik(const OracleOptions& opts) {
  const Dataset ds = io::read_dataset(opts.data);
  checked_series_index(ds, opts.series);
  const SeriesObservations series = ds.observations(static_cast<std::size_t>(opts.series));
  const ClusterParams theta = checked_theta(opts.mu, opts.log_psi);
  if (opts.points < 101) throw ConfigError("--points must be >= 101");
  GridSpec grid = default_grid(series, theta, opts.points);
  if (opts.grid_lo) grid.lo = *opts.grid_lo;
  if (opts.grid_hi) grid.hi = *opts.grid_hi;
  if (!(grid.lo < grid.hi)) throw ConfigError("--grid-lo must be below --grid-hi");
  return grid_loglik(series, theta, grid);
}

}  // namespace spikemix::cli
