#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "spikemix/numeric.hpp"
#include "spikemix/random.hpp"
#include "spikemix/ssm.hpp"

using namespace spikemix;
using doctest::Approx;

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == Approx(0.75).epsilon(1e-15));
  const double tiny = sigmoid(-40.0);
  CHECK(tiny > 0.0);
  CHECK(tiny < 1e-17);
  CHECK(tiny == Approx(std::exp(-40.0)).epsilon(1e-12));
  for (double x = -30.0; x <= 30.0; x += 0.37) CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-12);
  CHECK(logit(sigmoid(1.25)) == Approx(1.25).epsilon(1e-12));
}

TEST_CASE("binomial_logpmf closed forms") {
  CHECK(binomial_logpmf(0, 1, 0.5) == Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(binomial_logpmf(5, 5, 0.3) == Approx(5 * std::log(0.3)).epsilon(1e-13));
  CHECK(binomial_logpmf(2, 5, 0.3) == Approx(std::log(10 * 0.09 * 0.343)).epsilon(1e-13));
  CHECK(binomial_logpmf(0, 7, 0.0) == 0.0);
  CHECK(binomial_logpmf(1, 7, 0.0) == -INFINITY);
  CHECK(binomial_logpmf(7, 7, 1.0) == 0.0);
  CHECK(binomial_logpmf(6, 7, 1.0) == -INFINITY);
  CHECK_THROWS_AS(binomial_logpmf(3, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_logpmf(1, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_logpmf(1, 2, -0.1), std::invalid_argument);
}

TEST_CASE("binomial pmf normalizes") {
  for (int n : {1, 2, 17, 225, 300}) {
    for (double p : {0.001, 0.01, 0.3, 0.5, 0.97}) {
      double total = 0.0;
      for (int y = 0; y <= n; ++y) total += std::exp(binomial_logpmf(y, n, p));
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("h and f densities") {
  SSMConfig cfg{0.0, 1.0, 10, 3};
  const double psi0 = 1e-3;
  SSMConfig narrow{-2.0, psi0, 10, 3};
  const ClusterParams theta{1.0, 0.0};
  CHECK(h_logpdf(-1.0, theta, narrow) == Approx(-0.5 * std::log(2 * std::numbers::pi * psi0)).epsilon(1e-14));
  CHECK(h_logpdf(-1.0 + std::sqrt(psi0), theta, narrow) ==
        Approx(-0.5 * std::log(2 * std::numbers::pi * psi0) - 0.5).epsilon(1e-13));
  CHECK(h_logpdf(0.0, theta, cfg) == Approx(-0.5 * std::log(2 * std::numbers::pi) - 0.5).epsilon(1e-14));
  CHECK(h_logpdf(0.0, theta, cfg) == Approx(-1.4189385332046727).epsilon(1e-14));

  CHECK(f_logpdf(0.3, 0.3, {0.0, 0.0}) == Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(f_logpdf(0.3, 1.3, {0.0, 0.0}) == Approx(-0.5 * std::log(2 * std::numbers::pi) - 0.5).epsilon(1e-14));
  const ClusterParams quarter{0.0, std::log(0.25)};
  CHECK(f_logpdf(2.0, 2.5, quarter) == Approx(-0.5 * std::log(2 * std::numbers::pi * 0.25) - 0.5).epsilon(1e-13));
  CHECK(f_logpdf(2.0, 2.5, quarter) == Approx(-0.7257913526447274).epsilon(1e-13));
}

TEST_CASE("Gaussian densities integrate to one over eight sigmas") {
  // Composite Gauss-Legendre (5 nodes) over +/- 8 sd.
  const double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  const double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                             0.2369268850561891};
  auto integrate = [&](auto&& logpdf, double centre, double sd) {
    const int panels = 400;
    const double lo = centre - 8 * sd, width = 16 * sd / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * width;
      for (int k = 0; k < 5; ++k) total += 0.5 * width * weights[k] * std::exp(logpdf(mid + 0.5 * width * nodes[k]));
    }
    return total;
  };
  const SSMConfig cfg{-1.5, 0.04, 10, 3};
  const ClusterParams theta{0.7, std::log(2.5)};
  CHECK(std::abs(integrate([&](double x) { return h_logpdf(x, theta, cfg); }, -0.8, 0.2) - 1.0) < 1e-8);
  CHECK(std::abs(integrate([&](double x) { return f_logpdf(0.4, x, theta); }, 0.4, std::sqrt(2.5)) - 1.0) < 1e-8);
}

TEST_CASE("g_logpdf") {
  CHECK(g_logpdf(0.0, 1, {0.0, 1.0, 2, 1}) == Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(g_logpdf(-800.0, 0, {0.0, 1.0, 5, 1}) == Approx(0.0));
  CHECK(std::abs(g_logpdf(-60.0, 0, {0.0, 1.0, 225, 1})) < 1e-20);
  // Cumulative-enumeration reference: log(P(Y <= 2) - P(Y <= 1)) for Bin(225, 0.01).
  CHECK(g_logpdf(logit(0.01), 2, {0.0, 1.0, 225, 1}) == Approx(-1.3169659938074914).epsilon(1e-11));
  CHECK(g_logpdf(logit(0.01), 2, {0.0, 1.0, 225, 1}) ==
        Approx(binomial_logpmf(2, 225, 0.01)).epsilon(1e-13));
  // The probability floor keeps extreme states finite.
  CHECK(std::isfinite(g_logpdf(-1000.0, 3, {0.0, 1.0, 10, 1})));
  CHECK(std::isfinite(g_logpdf(1000.0, 3, {0.0, 1.0, 10, 1})));
  CHECK_THROWS_AS(g_logpdf(0.0, 11, {0.0, 1.0, 10, 1}), std::invalid_argument);
}

TEST_CASE("EmissionModel matches g_logpdf exactly") {
  auto s = testing::toy_series();
  const EmissionModel g(s);
  for (int t = 0; t < s.config.T; ++t)
    for (double x : {-30.0, -3.1, -2.0, 0.0, 4.5, 40.0}) CHECK(g(t, x) == g_logpdf(x, s.counts[t], s.config));
}

TEST_CASE("estimate_initial_state") {
  const std::vector<int> half{1, 1, 0, 2};
  CHECK(estimate_initial_state(half, 2) == Approx(0.0));
  std::vector<int> pre(100, 0);
  for (int i = 0; i < 100; ++i) pre[i] = i % 4 == 0 ? 12 : 11;  // total 1125
  CHECK(estimate_initial_state(pre, 225) == Approx(std::log(0.05 / 0.95)).epsilon(1e-12));
  CHECK(estimate_initial_state(pre, 225) == Approx(-2.9444389791664403).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_initial_state(std::vector<int>(50, 0), 225), std::invalid_argument);
  CHECK_THROWS_AS(estimate_initial_state(std::vector<int>(5, 3), 3), std::invalid_argument);
  CHECK_THROWS_AS(estimate_initial_state(std::vector<int>{}, 3), std::invalid_argument);
}

TEST_CASE("estimate_initial_state inverts the proportion map") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 300);
    const int len = 1 + static_cast<int>(rng.uniform() * 150);
    std::vector<int> c(len);
    long long total = 0;
    for (int& v : c) total += v = rng.binomial(n, rng.uniform(0.01, 0.99));
    if (total == 0 || total == static_cast<long long>(len) * n) continue;
    CHECK(std::abs(sigmoid(estimate_initial_state(c, n)) * len * n - static_cast<double>(total)) < 1e-9 * len * n);
  }
}

TEST_CASE("validation of model inputs") {
  CHECK_THROWS_AS(validate(ClusterParams{NAN, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ClusterParams{0.0, INFINITY}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SSMConfig{0.0, 0.0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SSMConfig{0.0, 1.0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SSMConfig{0.0, 1.0, 1, 0}), std::invalid_argument);
  auto s = testing::toy_series();
  s.counts[2] = 226;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = testing::toy_series();
  s.config.T = 4;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("numeric helpers") {
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == Approx(-1000.0 + std::log(2.0)));
  const std::vector<double> ninf{-INFINITY, -INFINITY};
  CHECK(log_sum_exp(ninf) == -INFINITY);
  std::vector<double> out(2);
  CHECK(normalize_log_weights(v, out) == Approx(-1000.0 + std::log(2.0)));
  CHECK(out[0] == Approx(0.5));
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) == 0.0);
  CHECK(mix64(1) != mix64(2));
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}
