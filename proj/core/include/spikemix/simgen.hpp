#ifndef SPIKEMIX_SIMGEN_HPP
#define SPIKEMIX_SIMGEN_HPP

#include <cstdint>
#include <vector>

#include "spikemix/dataset.hpp"
#include "spikemix/random.hpp"
#include "spikemix/ssm.hpp"

namespace spikemix {

// Response types of the synthetic population, numbered as in the truth labels.
enum class ResponseType : int {
  excited_sustained = 1,
  inhibited_sustained = 2,
  non_responsive = 3,
  excited_unsustained = 4,
  inhibited_unsustained = 5,
};

struct SimConfig {
  int n_per_type = 5;
  int R = 45;              // trials
  double delta_ms = 1.0;   // sub-bin width
  int M = 5;               // sub-bins per bin
  int T_pre = 100;         // bins before onset
  int T_post = 300;        // bins after onset
  int early_bins = 50;     // length of the early response window after onset
  double rate_lo = 10.0;   // Hz
  double rate_hi = 15.0;   // Hz
  int onset_offset_bins = 0;  // model onset minus true onset
  double psi0 = 1e-10;

  bool operator==(const SimConfig&) const = default;
};

void validate(const SimConfig& cfg);

// Rate multiplier of a response type for post-onset bin t (1-based);
// 1 before onset.
double rate_multiplier(ResponseType type, int t, int early_bins);

// Per-sub-bin spike probabilities p_t = lambda_t * delta for t = -(T_pre-1)..T_post.
std::vector<double> firing_probabilities(const SimConfig& cfg, ResponseType type, double base_rate_hz);

// Synthetic population with n_per_type series of each of the five types.
// counts cover T_pre + T_post bins; onset_index = T_pre + onset_offset_bins
// and x0 is estimated from every bin before onset_index.
Dataset generate_synthetic(const SimConfig& cfg, std::uint64_t seed);

// Raster of event counts indexed [bin][trial].
using Raster = std::vector<std::vector<int>>;

std::vector<int> collapse_over_trials(const Raster& raster);
std::vector<int> collapse_over_time(const Raster& raster);

// Builds a dataset from per-neuron rasters. In the time domain counts are
// per-bin sums over trials with binomial size R * M; in the trial domain
// they are per-trial sums over bins with binomial size T * M. x0 comes from
// the entries before onset_index.
Dataset dataset_from_rasters(const std::vector<Raster>& rasters, Domain domain, int M,
                             int onset_index, double bin_width_ms, double psi0 = 1e-10);

// Draws one series from the binomial state-space model itself.
SeriesObservations simulate_ssm(const SSMConfig& cfg, const ClusterParams& theta, Rng& rng);

}  // namespace spikemix

#endif  // SPIKEMIX_SIMGEN_HPP
