#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "commands.hpp"
#include "helpers.hpp"
#include "spikemix/error.hpp"
#include "spikemix/oracle.hpp"

using namespace spikemix;
using json = nlohmann::json;

namespace {

struct Outcome {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the built binary with a shell-quoted argument string.
Outcome run_cli(const testing::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + SPIKEMIX_CLI_PATH + "\" " + args + " > \"" + out.string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = io::read_text(out);
  o.err = io::read_text(err);
  return o;
}

// A small dataset: n_per_type series per type, 20 pre-onset and 30 post-onset bins.
std::filesystem::path small_dataset(const testing::TempDir& dir, int n_per_type = 1, const std::string& name = "data.json") {
  io::SimulateConfig cfg;
  cfg.seed = 3;
  cfg.sim.n_per_type = n_per_type;
  cfg.sim.T_pre = 20;
  cfg.sim.T_post = 30;
  cfg.sim.early_bins = 10;
  const auto cfg_path = dir / (name + ".sim.json");
  io::write_text(cfg_path, io::simulate_config_to_json(cfg));
  const auto path = dir / name;
  cli::cmd_simulate(cfg_path, path, std::nullopt);
  return path;
}

std::filesystem::path fast_config(const testing::TempDir& dir, int iterations = 2, int burn_in = 0) {
  io::RunConfig cfg;
  cfg.seed = 17;
  cfg.hyper.iterations = iterations;
  cfg.hyper.burn_in = burn_in;
  cfg.hyper.particles = 16;
  cfg.hyper.csmc_rounds = 1;
  cfg.hyper.m = 2;
  cfg.workers = 1;
  const auto path = dir / "run.json";
  io::write_text(path, io::run_config_to_json(cfg));
  return path;
}

}  // namespace

TEST_CASE("simulate defaults") {
  testing::TempDir dir("cli");
  const auto ds = cli::cmd_simulate(std::nullopt, dir / "d.json", 1);
  CHECK(ds.series.size() == 25);
  for (const auto& s : ds.series) CHECK(s.counts.size() == 400);
  CHECK(*ds.truth == std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5});
  CHECK(io::read_dataset(dir / "d.json") == ds);

  io::SimulateConfig one;
  one.sim.n_per_type = 1;
  io::write_text(dir / "one.json", io::simulate_config_to_json(one));
  CHECK(cli::cmd_simulate(dir / "one.json", dir / "d1.json", std::nullopt).series.size() == 5);
}

TEST_CASE("simulate rejects inverted rates with exit code 1") {
  testing::TempDir dir("cli");
  io::write_text(dir / "bad.json", R"({"schema_version": 1, "rate_lo": 20, "rate_hi": 15})");
  const auto o = run_cli(dir, "simulate --config \"" + (dir / "bad.json").string() + "\" --out \"" +
                                  (dir / "d.json").string() + "\"");
  CHECK(o.exit_code == 1);
  const auto err = json::parse(o.err);
  CHECK(err["error"] == "config");
  CHECK(err["exit_code"] == 1);
  CHECK(err["message"].get<std::string>().find("rate_lo") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "d.json"));
}

TEST_CASE("infer writes one record per iteration and is reproducible") {
  testing::TempDir dir("cli");
  const auto data = small_dataset(dir);
  const auto config = fast_config(dir);
  cli::InferOptions opts;
  opts.data = data;
  opts.config = config;
  opts.out = dir / "a.ndjson";
  const auto summary = cli::cmd_infer(opts);
  CHECK(summary.records == 2);
  const auto trace = io::read_trace(dir / "a.ndjson");
  CHECK(trace.samples.size() == 2);
  CHECK(trace.header.series_ids.size() == 5);

  opts.out = dir / "b.ndjson";
  opts.workers = 3;
  cli::cmd_infer(opts);
  CHECK(io::read_text(dir / "a.ndjson") == io::read_text(dir / "b.ndjson"));

  opts.out = dir / "c.ndjson";
  opts.seed = 18;
  cli::cmd_infer(opts);
  CHECK(io::read_text(dir / "a.ndjson") != io::read_text(dir / "c.ndjson"));
}

TEST_CASE("infer on a single series keeps one cluster") {
  testing::TempDir dir("cli");
  auto ds = io::read_dataset(small_dataset(dir));
  ds.series.resize(1);
  ds.truth.reset();
  io::write_dataset(ds, dir / "one.json");
  cli::InferOptions opts;
  opts.data = dir / "one.json";
  opts.config = fast_config(dir, 5);
  opts.out = dir / "t.ndjson";
  cli::cmd_infer(opts);
  for (const auto& s : io::read_trace(dir / "t.ndjson").samples) CHECK(s.state.num_clusters() == 1);
}

TEST_CASE("infer validates its inputs") {
  testing::TempDir dir("cli");
  const auto data = small_dataset(dir);
  io::write_text(dir / "typo.json", R"({"schema_version": 1, "particels": 10})");
  cli::InferOptions opts;
  opts.data = data;
  opts.config = dir / "typo.json";
  opts.out = dir / "t.ndjson";
  CHECK_THROWS_AS(cli::cmd_infer(opts), ConfigError);
  CHECK_FALSE(std::filesystem::exists(dir / "t.ndjson"));

  io::write_text(dir / "trial.json", R"({"schema_version": 1, "domain": "trial"})");
  opts.config = dir / "trial.json";
  CHECK_THROWS_AS(cli::cmd_infer(opts), ConfigError);

  opts.config.reset();
  opts.data.reset();
  CHECK_THROWS_AS(cli::cmd_infer(opts), ConfigError);
}

TEST_CASE("select echoes a single-record trace") {
  testing::TempDir dir("cli");
  io::TraceHeader header;
  header.series_ids = {"a", "b", "c"};
  {
    io::TraceWriter writer(dir / "t.ndjson", header);
    writer.write({1, {{1, 0, 1}, {{0.5, -9.0}, {-0.25, -3.0}}}, {true, false}});
  }
  cli::SelectOptions opts;
  opts.trace = dir / "t.ndjson";
  opts.burn_in = 0;
  opts.out = dir / "sel.json";
  opts.matrix = dir / "m.csv";
  const auto report = cli::cmd_select(opts);
  CHECK(report.selection.assignments == std::vector<int>{0, 1, 0});
  CHECK(report.selection.params == std::vector<ClusterParams>{{-0.25, -3.0}, {0.5, -9.0}});
  CHECK(report.selection.source_index == 1);
  CHECK(io::read_clustering(dir / "sel.json") == report);
  const auto m = io::read_cooccurrence_csv(dir / "m.csv");
  CHECK(m.ids == header.series_ids);
  CHECK(m.matrix.entries == std::vector<double>{1, 0, 1, 0, 1, 0, 1, 0, 1});

  opts.burn_in = 1;
  CHECK_THROWS_AS(cli::cmd_select(opts), ConfigError);
}

TEST_CASE("bench-variance shapes and the identical-seed hook") {
  testing::TempDir dir("cli");
  cli::VarianceOptions opts;
  opts.data = small_dataset(dir);
  opts.grid_mu = {0.0};
  opts.grid_log_psi = {-6.0};
  opts.replicates = 2;
  opts.bpf_particles = 64;
  opts.csmc_particles = 16;
  opts.csmc_rounds = 1;
  opts.out = dir / "v.csv";
  const auto rows = cli::cmd_bench_variance(opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == cli::VarianceMethod::bpf);
  CHECK(rows[1].method == cli::VarianceMethod::csmc);
  for (const auto& r : rows) CHECK(r.variance > 0.0);
  const std::string csv = io::read_text(dir / "v.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("mu,log_psi,method,", 0) == 0);

  opts.identical_seeds = true;
  opts.replicates = 5;
  for (const auto& r : cli::cmd_bench_variance(opts)) CHECK(r.variance == 0.0);

  opts.replicates = 1;
  CHECK_THROWS_AS(cli::cmd_bench_variance(opts), ConfigError);
}

TEST_CASE("oracle-loglik through the binary") {
  testing::TempDir dir("cli");
  const auto data = small_dataset(dir);
  const auto series = io::read_dataset(data).observations(2);
  const ClusterParams theta{0.2, -5.0};
  const double expected = grid_loglik(series, theta, default_grid(series, theta));

  const auto o = run_cli(dir, "oracle-loglik --data \"" + data.string() + "\" --series 2 --mu 0.2 --log-psi -5");
  REQUIRE(o.exit_code == 0);
  CHECK(json::parse(o.out)["log_likelihood"].get<double>() == expected);

  const auto bad = run_cli(dir, "oracle-loglik --data \"" + data.string() + "\" --series 99");
  CHECK(bad.exit_code == 1);
  const auto narrow = run_cli(dir, "oracle-loglik --data \"" + data.string() + "\" --grid-lo 5 --grid-hi 6");
  CHECK(narrow.exit_code == 2);
  CHECK(json::parse(narrow.err)["error"] == "numerical");
}

TEST_CASE("end-to-end pipeline through the binary") {
  testing::TempDir dir("cli");
  const auto data = small_dataset(dir);
  const auto config = fast_config(dir, 3, 1);
  const std::string trace = (dir / "t.ndjson").string();

  auto o = run_cli(dir, "infer --data \"" + data.string() + "\" --config \"" + config.string() + "\" --out \"" +
                            trace + "\" --workers 1");
  REQUIRE(o.exit_code == 0);
  CHECK(json::parse(o.out)["records"] == 3);

  o = run_cli(dir, "select --trace \"" + trace + "\" --out \"" + (dir / "c.json").string() + "\" --matrix \"" +
                       (dir / "m.csv").string() + "\"");
  REQUIRE(o.exit_code == 0);
  const auto report = io::read_clustering(dir / "c.json");
  CHECK(report.burn_in == 1);
  CHECK(report.selection.assignments.size() == 5);

  o = run_cli(dir, "bench-variance --data \"" + data.string() +
                       "\" --grid-mu 0 --grid-logpsi -6,-4 --reps 2 --method bpf --bpf-particles 32 --out \"" +
                       (dir / "v.csv").string() + "\"");
  REQUIRE(o.exit_code == 0);
  const std::string csv = io::read_text(dir / "v.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("usage errors and help") {
  testing::TempDir dir("cli");
  auto o = run_cli(dir, "");
  CHECK(o.exit_code == 1);
  CHECK(json::parse(o.err)["error"] == "usage");
  o = run_cli(dir, "frobnicate");
  CHECK(o.exit_code == 1);
  o = run_cli(dir, "select --out x.json");
  CHECK(o.exit_code == 1);
  o = run_cli(dir, "--help");
  CHECK(o.exit_code == 0);
  CHECK(o.out.find("bench-variance") != std::string::npos);
  o = run_cli(dir, "infer --data \"" + (dir / "missing.json").string() + "\" --out \"" + (dir / "t").string() + "\"");
  CHECK(o.exit_code == 1);
  CHECK(json::parse(o.err)["error"] == "config");
}

TEST_CASE("worker count resolution") {
  CHECK(cli::resolve_workers(3) == 3);
  ::setenv("SPIKEMIX_WORKERS", "2", 1);
  CHECK(cli::resolve_workers(0) == 2);
  ::setenv("SPIKEMIX_WORKERS", "two", 1);
  CHECK_THROWS_AS(cli::resolve_workers(0), ConfigError);
  ::unsetenv("SPIKEMIX_WORKERS");
  CHECK(cli::resolve_workers(0) >= 1);
}
