#include "spikemix/simgen.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace spikemix {

void validate(const SimConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("simulation config: " + msg); };
  if (cfg.n_per_type < 1) fail("n_per_type must be >= 1");
  if (cfg.R < 1 || cfg.M < 1) fail("R and M must be >= 1");
  if (!(cfg.delta_ms > 0.0)) fail("delta_ms must be positive");
  if (cfg.T_pre < 1 || cfg.T_post < 1) fail("T_pre and T_post must be >= 1");
  if (cfg.early_bins < 1 || cfg.early_bins > cfg.T_post) fail("early_bins must lie in [1, T_post]");
  if (!(cfg.rate_lo > 0.0) || !(cfg.rate_lo < cfg.rate_hi)) fail("need 0 < rate_lo < rate_hi");
  if (std::abs(cfg.onset_offset_bins) >= cfg.T_pre) fail("|onset_offset_bins| must be < T_pre");
  if (cfg.onset_offset_bins >= cfg.T_post) fail("onset_offset_bins must leave post-onset bins");
  if (!(cfg.psi0 > 0.0)) fail("psi0 must be positive");
}

double rate_multiplier(ResponseType type, int t, int early_bins) {
  if (t <= 0) return 1.0;
  const bool early = t <= early_bins;
  switch (type) {
    case ResponseType::excited_sustained: return std::exp(1.0);
    case ResponseType::inhibited_sustained: return std::exp(-1.0);
    case ResponseType::non_responsive: return 1.0;
    case ResponseType::excited_unsustained: return early ? std::exp(1.0) : 1.0;
    case ResponseType::inhibited_unsustained: return early ? std::exp(-1.0) : 1.0;
  }
  return 1.0;
}

std::vector<double> firing_probabilities(const SimConfig& cfg, ResponseType type, double base_rate_hz) {
  const double delta_s = cfg.delta_ms / 1000.0;
  std::vector<double> p;
  p.reserve(cfg.T_pre + cfg.T_post);
  for (int t = -(cfg.T_pre - 1); t <= cfg.T_post; ++t) {
    const double prob = base_rate_hz * rate_multiplier(type, t, cfg.early_bins) * delta_s;
    if (!(prob < 1.0)) throw std::invalid_argument("firing probability >= 1; lower the rates or delta_ms");
    p.push_back(prob);
  }
  return p;
}

Dataset generate_synthetic(const SimConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Dataset ds;
  ds.domain = Domain::time;
  ds.bin_width_ms = cfg.delta_ms * cfg.M;
  ds.n_trials_bins = cfg.R * cfg.M;
  ds.onset_index = cfg.T_pre + cfg.onset_offset_bins;
  ds.true_onset_index = cfg.T_pre;
  ds.truth.emplace();

  int index = 0;
  for (int type = 1; type <= 5; ++type) {
    for (int j = 0; j < cfg.n_per_type; ++j, ++index) {
      Rng rng(derive_seed({seed, static_cast<std::uint64_t>(index)}));
      const double rate = rng.uniform(cfg.rate_lo, cfg.rate_hi);
      const auto p = firing_probabilities(cfg, static_cast<ResponseType>(type), rate);
      DatasetSeries s;
      char id[32];
      std::snprintf(id, sizeof id, "neuron_%03d", index);
      s.id = id;
      s.psi0 = cfg.psi0;
      s.counts.reserve(p.size());
      for (double pt : p) s.counts.push_back(rng.binomial(ds.n_trials_bins, pt));
      s.x0 = estimate_initial_state(std::span<const int>(s.counts.data(), ds.onset_index),
                                    ds.n_trials_bins);
      ds.series.push_back(std::move(s));
      ds.truth->push_back(type);
    }
  }
  return ds;
}

namespace {

void check_rectangular(const Raster& raster) {
  if (raster.empty()) throw std::invalid_argument("raster has no bins");
  for (const auto& row : raster)
    if (row.size() != raster.front().size()) throw std::invalid_argument("raster is not rectangular");
}

}  // namespace

std::vector<int> collapse_over_trials(const Raster& raster) {
  check_rectangular(raster);
  std::vector<int> y(raster.size(), 0);
  for (std::size_t t = 0; t < raster.size(); ++t)
    for (int c : raster[t]) y[t] += c;
  return y;
}

std::vector<int> collapse_over_time(const Raster& raster) {
  check_rectangular(raster);
  std::vector<int> y(raster.front().size(), 0);
  for (const auto& row : raster)
    for (std::size_t r = 0; r < row.size(); ++r) y[r] += row[r];
  return y;
}

Dataset dataset_from_rasters(const std::vector<Raster>& rasters, Domain domain, int M,
                             int onset_index, double bin_width_ms, double psi0) {
  if (rasters.empty()) throw std::invalid_argument("no rasters");
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  for (const auto& r : rasters) {
    check_rectangular(r);
    if (r.size() != rasters.front().size() || r.front().size() != rasters.front().front().size())
      throw std::invalid_argument("rasters differ in shape");
  }
  const int bins = static_cast<int>(rasters.front().size());
  const int trials = static_cast<int>(rasters.front().front().size());
  Dataset ds;
  ds.domain = domain;
  ds.bin_width_ms = bin_width_ms;
  ds.n_trials_bins = (domain == Domain::time ? trials : bins) * M;
  ds.onset_index = onset_index;
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    DatasetSeries s;
    s.id = "neuron_" + std::to_string(i);
    s.psi0 = psi0;
    s.counts = domain == Domain::time ? collapse_over_trials(rasters[i]) : collapse_over_time(rasters[i]);
    if (onset_index < 1 || onset_index >= static_cast<int>(s.counts.size()))
      throw std::invalid_argument("onset_index must leave entries on both sides");
    s.x0 = estimate_initial_state(std::span<const int>(s.counts.data(), onset_index), ds.n_trials_bins);
    ds.series.push_back(std::move(s));
  }
  return ds;
}

SeriesObservations simulate_ssm(const SSMConfig& cfg, const ClusterParams& theta, Rng& rng) {
  validate(cfg);
  validate(theta);
  SeriesObservations out;
  out.config = cfg;
  out.counts.reserve(cfg.T);
  double x = rng.normal(cfg.x0 + theta.mu, std::sqrt(cfg.psi0));
  const double sd = std::sqrt(theta.psi());
  for (int t = 0; t < cfg.T; ++t) {
    if (t > 0) x = rng.normal(x, sd);
    out.counts.push_back(rng.binomial(cfg.n_trials_bins, sigmoid(x)));
  }
  return out;
}

}  // namespace spikemix
