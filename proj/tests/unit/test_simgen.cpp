#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "spikemix/error.hpp"
#include "spikemix/simgen.hpp"

using namespace spikemix;
using doctest::Approx;

TEST_CASE("rate multipliers by response type") {
  const double e = std::numbers::e;
  CHECK(rate_multiplier(ResponseType::excited_sustained, 0, 50) == 1.0);
  CHECK(rate_multiplier(ResponseType::excited_sustained, 1, 50) == Approx(e));
  CHECK(rate_multiplier(ResponseType::excited_sustained, 300, 50) == Approx(e));
  CHECK(rate_multiplier(ResponseType::inhibited_sustained, 120, 50) == Approx(1.0 / e));
  CHECK(rate_multiplier(ResponseType::non_responsive, 10, 50) == 1.0);
  CHECK(rate_multiplier(ResponseType::excited_unsustained, 50, 50) == Approx(e));
  CHECK(rate_multiplier(ResponseType::excited_unsustained, 51, 50) == 1.0);
  CHECK(rate_multiplier(ResponseType::inhibited_unsustained, 50, 50) == Approx(1.0 / e));
  CHECK(rate_multiplier(ResponseType::inhibited_unsustained, 51, 50) == 1.0);
  CHECK(rate_multiplier(ResponseType::inhibited_unsustained, -99, 50) == 1.0);
}

TEST_CASE("firing probabilities follow the type schedule") {
  const SimConfig cfg;
  const auto p = firing_probabilities(cfg, ResponseType::excited_sustained, 10.0);
  REQUIRE(p.size() == 400);
  CHECK(p[0] == Approx(0.01));
  CHECK(p[99] == Approx(0.01));  // t = 0
  CHECK(p[100] == Approx(0.01 * std::numbers::e));
  CHECK(p[100] == Approx(0.02718).epsilon(1e-4));
  CHECK(p[399] == Approx(0.01 * std::numbers::e));
  const auto flat = firing_probabilities(cfg, ResponseType::non_responsive, 12.0);
  for (double v : flat) CHECK(v == Approx(0.012));

  SimConfig hot;
  hot.delta_ms = 100.0;
  CHECK_THROWS_AS(firing_probabilities(hot, ResponseType::excited_sustained, 10.0), std::invalid_argument);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.rate_lo = 20.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = SimConfig{};
  cfg.onset_offset_bins = -100;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.onset_offset_bins = 99;
  CHECK_NOTHROW(validate(cfg));
  cfg = SimConfig{};
  cfg.n_per_type = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = SimConfig{};
  cfg.R = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("generated population shape and metadata") {
  const SimConfig cfg;
  const auto ds = generate_synthetic(cfg, 3);
  REQUIRE(ds.series.size() == 25);
  REQUIRE(ds.truth.has_value());
  std::map<int, int> per_type;
  for (int label : *ds.truth) ++per_type[label];
  CHECK(per_type.size() == 5);
  for (const auto& [label, count] : per_type) {
    CHECK(label >= 1);
    CHECK(label <= 5);
    CHECK(count == 5);
  }
  CHECK(ds.n_trials_bins == 225);
  CHECK(ds.bin_width_ms == 5.0);
  CHECK(ds.onset_index == 100);
  CHECK(ds.true_onset_index == 100);
  CHECK(ds.domain == Domain::time);
  for (const auto& s : ds.series) {
    REQUIRE(s.counts.size() == 400);
    for (int c : s.counts) {
      CHECK(c >= 0);
      CHECK(c <= 225);
    }
    long pre = 0;
    for (int t = 0; t < 100; ++t) pre += s.counts[t];
    CHECK(s.x0 == Approx(std::log(pre / (100.0 * 225.0 - pre))));
  }
  CHECK_NOTHROW(validate(ds));
  const auto obs = ds.observations(0);
  CHECK(obs.config.T == 300);
  CHECK(obs.counts.size() == 300);
}

TEST_CASE("generation is deterministic under a fixed seed") {
  const SimConfig cfg;
  CHECK(generate_synthetic(cfg, 11) == generate_synthetic(cfg, 11));
  CHECK_FALSE(generate_synthetic(cfg, 11) == generate_synthetic(cfg, 12));
}

TEST_CASE("onset offset moves only the model-facing index") {
  for (int w : {-20, 8, 40}) {
    SimConfig cfg;
    cfg.onset_offset_bins = w;
    const auto shifted = generate_synthetic(cfg, 5);
    const auto base = generate_synthetic(SimConfig{}, 5);
    CHECK(shifted.onset_index == 100 + w);
    CHECK(shifted.true_onset_index == 100);
    CHECK(shifted.onset_index == *shifted.true_onset_index + w);
    for (std::size_t i = 0; i < base.series.size(); ++i) CHECK(shifted.series[i].counts == base.series[i].counts);
    CHECK(shifted.observations(0).counts.size() == static_cast<std::size_t>(300 - w));
  }
}

TEST_CASE("window means match the binomial mean") {
  // Base rates are Uniform(10, 15) Hz, so E[y_t] = 225 * 12.5 Hz * 1 ms * multiplier.
  SimConfig cfg;
  cfg.n_per_type = 20;
  const double e = std::numbers::e;
  const std::map<int, std::array<double, 3>> multipliers{
      {1, {1.0, e, e}}, {2, {1.0, 1 / e, 1 / e}}, {3, {1.0, 1.0, 1.0}}, {4, {1.0, e, 1.0}}, {5, {1.0, 1 / e, 1.0}}};
  std::map<int, std::array<std::vector<double>, 3>> window_means;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = generate_synthetic(cfg, seed);
    for (std::size_t i = 0; i < ds.series.size(); ++i) {
      const auto& c = ds.series[i].counts;
      const int windows[4] = {0, 100, 150, 400};
      for (int w = 0; w < 3; ++w) {
        double s = 0.0;
        for (int t = windows[w]; t < windows[w + 1]; ++t) s += c[t];
        window_means[(*ds.truth)[i]][w].push_back(s / (windows[w + 1] - windows[w]));
      }
    }
  }
  for (const auto& [type, per_window] : window_means) {
    for (int w = 0; w < 3; ++w) {
      const auto& v = per_window[w];
      REQUIRE(v.size() == 2000);
      const double expected = 225.0 * 12.5e-3 * multipliers.at(type)[w];
      const double se = std::sqrt(testing::sample_variance(v) / v.size());
      CHECK_MESSAGE(std::abs(testing::mean(v) - expected) < 3.0 * se,
                    "type " << type << " window " << w << " mean " << testing::mean(v) << " expected " << expected);
    }
  }
}

TEST_CASE("collapse over trials") {
  CHECK(collapse_over_trials(Raster{{0, 0}, {0, 0}, {0, 0}}) == std::vector<int>{0, 0, 0});
  CHECK(collapse_over_trials(Raster{{3}, {1}, {4}}) == std::vector<int>{3, 1, 4});
  // Trial one is [1, 2] over two bins, trial two is [3, 4].
  CHECK(collapse_over_trials(Raster{{1, 3}, {2, 4}}) == std::vector<int>{4, 6});
  CHECK_THROWS_AS(collapse_over_trials(Raster{{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("collapse over time") {
  CHECK(collapse_over_time(Raster{{2, 0, 5}}) == std::vector<int>{2, 0, 5});
  const Raster ones(300, std::vector<int>(15, 1));
  CHECK(collapse_over_time(ones) == std::vector<int>(15, 300));
  Rng rng(4);
  const int M = 5;
  Raster r(300, std::vector<int>(20));
  for (auto& row : r)
    for (int& v : row) v = rng.binomial(M, 0.3);
  for (int v : collapse_over_time(r)) CHECK(v <= 300 * M);
}

TEST_CASE("datasets from rasters in both domains") {
  Rng rng(6);
  std::vector<Raster> rasters(2, Raster(40, std::vector<int>(30)));
  for (auto& r : rasters)
    for (auto& row : r)
      for (int& v : row) v = rng.binomial(5, 0.02);

  const auto time = dataset_from_rasters(rasters, Domain::time, 5, 10, 5.0);
  CHECK(time.n_trials_bins == 150);
  CHECK(time.series[0].counts == collapse_over_trials(rasters[0]));
  CHECK_NOTHROW(validate(time));

  const auto trial = dataset_from_rasters(rasters, Domain::trial, 5, 15, 5.0);
  CHECK(trial.domain == Domain::trial);
  CHECK(trial.n_trials_bins == 200);
  CHECK(trial.series[1].counts == collapse_over_time(rasters[1]));
  CHECK(trial.observations(0).config.T == 15);
  long pre = 0;
  for (int r = 0; r < 15; ++r) pre += trial.series[0].counts[r];
  CHECK(trial.series[0].x0 == Approx(std::log(pre / (15.0 * 200.0 - pre))));

  CHECK_THROWS_AS(dataset_from_rasters(rasters, Domain::time, 5, 40, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(dataset_from_rasters({}, Domain::time, 5, 10, 5.0), std::invalid_argument);
}

TEST_CASE("model simulation respects the binomial size") {
  Rng rng(9);
  const SSMConfig cfg{-3.0, 1e-10, 225, 500};
  const auto s = simulate_ssm(cfg, {0.0, -2.0}, rng);
  REQUIRE(s.counts.size() == 500);
  for (int c : s.counts) {
    CHECK(c >= 0);
    CHECK(c <= 225);
  }
  CHECK(s.config == cfg);
}
