#ifndef SPIKEMIX_IO_HPP
#define SPIKEMIX_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikemix/dataset.hpp"
#include "spikemix/dpm.hpp"
#include "spikemix/postsel.hpp"
#include "spikemix/simgen.hpp"

// File formats. Every reader throws ConfigError with the offending path,
// line or key; every document carries schema_version.
namespace spikemix::io {

inline constexpr int kSchemaVersion = 1;

std::string read_text(const std::filesystem::path& path);
// Writes through a temporary file in the same directory, then renames.
void write_text(const std::filesystem::path& path, std::string_view text);

// Dataset document.
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(std::string_view text);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// Inference configuration. Missing keys keep their defaults; unknown keys
// are rejected.
struct RunConfig {
  Hyperparams hyper;
  std::optional<double> psi0;  // overrides the dataset's per-series psi0
  std::uint64_t seed = 0;
  int workers = 0;             // 0: take the environment / hardware default
  std::optional<Domain> domain;  // must match the dataset when given
  std::string data_path;
  std::string out_path;

  bool operator==(const RunConfig&) const = default;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(std::string_view text);
RunConfig read_run_config(const std::filesystem::path& path);

struct SimulateConfig {
  SimConfig sim;
  std::uint64_t seed = 0;

  bool operator==(const SimulateConfig&) const = default;
};

std::string simulate_config_to_json(const SimulateConfig& cfg);
SimulateConfig simulate_config_from_json(std::string_view text);
SimulateConfig read_simulate_config(const std::filesystem::path& path);

// Trace: newline-delimited JSON. The first line is a header with the seed,
// hyperparameters and series ids; each following line is one sample.
struct TraceHeader {
  std::uint64_t seed = 0;
  Hyperparams hyper;
  std::vector<std::string> series_ids;

  bool operator==(const TraceHeader&) const = default;
};

std::string trace_header_line(const TraceHeader& header);
std::string trace_record_line(const GibbsSample& sample);

// Appends records to a stream as they arrive, flushing each line.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const TraceHeader& header);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(const GibbsSample& sample);
  std::size_t records() const { return records_; }

 private:
  std::unique_ptr<std::ofstream> out_;
  std::filesystem::path path_;
  std::size_t records_ = 0;
};

struct TraceFile {
  TraceHeader header;
  std::vector<GibbsSample> samples;

  GibbsTrace to_trace() const;
};

TraceFile parse_trace(std::istream& in, std::string_view source = "trace");
TraceFile read_trace(const std::filesystem::path& path);

// Co-occurrence CSV: a header row of ids, then N rows of N values with six
// decimals. Writing checks symmetry, unit diagonal and the [0, 1] range.
std::string cooccurrence_to_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& ids);
void write_cooccurrence_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& ids,
                            const std::filesystem::path& path);

struct LabelledMatrix {
  std::vector<std::string> ids;
  CooccurrenceMatrix matrix;
};
LabelledMatrix cooccurrence_from_csv(std::string_view text);
LabelledMatrix read_cooccurrence_csv(const std::filesystem::path& path);

struct ClusteringReport {
  SelectedClustering selection;
  std::vector<std::string> series_ids;
  int burn_in = 0;
  int samples = 0;  // trace length

  bool operator==(const ClusteringReport&) const = default;
};

std::string clustering_to_json(const ClusteringReport& report);
ClusteringReport clustering_from_json(std::string_view text);
void write_clustering(const ClusteringReport& report, const std::filesystem::path& path);
ClusteringReport read_clustering(const std::filesystem::path& path);

}  // namespace spikemix::io

#endif  // SPIKEMIX_IO_HPP
