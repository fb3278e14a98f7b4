#ifndef SPIKEMIX_TOOLS_COMMANDS_HPP
#define SPIKEMIX_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spikemix/io.hpp"

namespace spikemix::cli {

namespace fs = std::filesystem;

// Worker count: explicit value if positive, else SPIKEMIX_WORKERS, else the
// hardware concurrency.
int resolve_workers(int requested);

Dataset cmd_simulate(const std::optional<fs::path>& config, const fs::path& out,
                     std::optional<std::uint64_t> seed);

struct InferOptions {
  std::optional<fs::path> data;
  std::optional<fs::path> config;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> iterations;
};

struct InferSummary {
  fs::path trace_path;
  int records = 0;
  int final_clusters = 0;
};

InferSummary cmd_infer(const InferOptions& opts);

struct SelectOptions {
  fs::path trace;
  std::optional<int> burn_in;  // defaults to the trace header's burn_in
  fs::path out;                // clustering JSON
  std::optional<fs::path> matrix;  // co-occurrence CSV
};

io::ClusteringReport cmd_select(const SelectOptions& opts);

enum class VarianceMethod { bpf, csmc };

struct VarianceOptions {
  fs::path data;
  int series = 0;
  std::vector<double> grid_mu{-1.0, 0.0, 1.0};
  std::vector<double> grid_log_psi{-12.0, -8.0, -4.0};
  int replicates = 100;
  std::vector<VarianceMethod> methods{VarianceMethod::bpf, VarianceMethod::csmc};
  int bpf_particles = 1024;
  int csmc_particles = 64;
  int csmc_rounds = 3;
  std::uint64_t seed = 0;
  bool identical_seeds = false;  // every replicate reuses one stream
  int workers = 1;
  std::optional<fs::path> out;
};

struct VarianceRow {
  double mu = 0.0;
  double log_psi = 0.0;
  VarianceMethod method = VarianceMethod::bpf;
  int particles = 0;
  int rounds = 0;
  int replicates = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ms_per_eval = 0.0;
  int degenerate = 0;
};

std::string to_string(VarianceMethod m);
std::vector<VarianceRow> cmd_bench_variance(const VarianceOptions& opts);
std::string variance_csv(const std::vector<VarianceRow>& rows);

struct OracleOptions {
  fs::path data;
  int series = 0;
  double mu = 0.0;
  double log_psi = -4.0;
  int points = 2001;
  std::optional<double> grid_lo;  // default: see default_grid
  std::optional<double> grid_hi;
};

double cmd_oracle_loglik(const OracleOptions& opts);

}  // namespace spikemix::cli

#endif  // SPIKEMIX_TOOLS_COMMANDS_HPP
