#include "spikemix/dataset.hpp"

#include <string>

#include "spikemix/error.hpp"

namespace spikemix {

std::string_view to_string(Domain d) { return d == Domain::time ? "time" : "trial"; }

Domain domain_from_string(std::string_view s) {
  if (s == "time") return Domain::time;
  if (s == "trial") return Domain::trial;
  throw ConfigError("unknown domain '" + std::string(s) + "' (expected time|trial)");
}

SeriesObservations Dataset::observations(std::size_t i) const {
  const DatasetSeries& s = series.at(i);
  SeriesObservations obs;
  obs.counts.assign(s.counts.begin() + onset_index, s.counts.end());
  obs.config.x0 = s.x0;
  obs.config.psi0 = s.psi0;
  obs.config.n_trials_bins = n_trials_bins;
  obs.config.T = static_cast<int>(obs.counts.size());
  return obs;
}

std::vector<SeriesObservations> Dataset::observations() const {
  std::vector<SeriesObservations> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out.push_back(observations(i));
  return out;
}

void validate(const Dataset& ds) {
  auto fail = [](const std::string& msg) { throw ConfigError("dataset: " + msg); };
  if (ds.series.empty()) fail("no series");
  if (ds.n_trials_bins < 1) fail("n_trials_bins must be >= 1");
  if (!(ds.bin_width_ms > 0.0)) fail("bin_width_ms must be positive");
  if (ds.onset_index < 0) fail("onset_index must be >= 0");
  for (std::size_t i = 0; i < ds.series.size(); ++i) {
    const auto& s = ds.series[i];
    const std::string where = "series[" + std::to_string(i) + "]";
    if (static_cast<int>(s.counts.size()) <= ds.onset_index)
      fail(where + ": needs at least one count after onset_index");
    if (!(s.psi0 > 0.0)) fail(where + ".psi0 must be positive");
    for (std::size_t t = 0; t < s.counts.size(); ++t)
      if (s.counts[t] < 0 || s.counts[t] > ds.n_trials_bins)
        fail(where + ".counts[" + std::to_string(t) + "] = " + std::to_string(s.counts[t]) +
             " outside [0, " + std::to_string(ds.n_trials_bins) + "]");
  }
  if (ds.truth && ds.truth->size() != ds.series.size()) fail("truth length differs from series count");
}

}  // namespace spikemix
