#ifndef SPIKEMIX_DATASET_HPP
#define SPIKEMIX_DATASET_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikemix/ssm.hpp"

namespace spikemix {

// Which collapse of the raster the counts come from: bins over time summed
// across trials, or trials summed across bins.
enum class Domain { time, trial };

std::string_view to_string(Domain d);
Domain domain_from_string(std::string_view s);

struct DatasetSeries {
  std::string id;
  double x0 = 0.0;
  double psi0 = 1e-10;
  std::vector<int> counts;  // full series including the pre-onset window

  bool operator==(const DatasetSeries&) const = default;
};

struct Dataset {
  static constexpr int kSchemaVersion = 1;

  Domain domain = Domain::time;
  double bin_width_ms = 5.0;
  int n_trials_bins = 225;
  int onset_index = 0;  // first model-facing entry of counts
  std::optional<int> true_onset_index;
  std::vector<DatasetSeries> series;
  std::optional<std::vector<int>> truth;

  // Counts from onset_index on, with x0 / psi0 / binomial size attached.
  SeriesObservations observations(std::size_t i) const;
  std::vector<SeriesObservations> observations() const;

  bool operator==(const Dataset&) const = default;
};

// Throws ConfigError describing the first broken invariant.
void validate(const Dataset& ds);

}  // namespace spikemix

#endif  // SPIKEMIX_DATASET_HPP
