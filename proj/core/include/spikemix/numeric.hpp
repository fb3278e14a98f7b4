#ifndef SPIKEMIX_NUMERIC_HPP
#define SPIKEMIX_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace spikemix {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// log(sum(exp(v))). Returns -inf for an empty span or when every entry is -inf.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double gaussian_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
}

// Normalizes log-weights in place to probabilities; returns log(sum(exp(lw))).
inline double normalize_log_weights(std::span<const double> lw, std::span<double> out) {
  if (lw.empty()) return kNegInf;
  const double mx = *std::max_element(lw.begin(), lw.end());
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) sum += out[i] = std::exp(lw[i] - mx);
  const double inv = 1.0 / sum;
  for (std::size_t i = 0; i < lw.size(); ++i) out[i] *= inv;
  return mx + std::log(sum);
}

}  // namespace spikemix

#endif  // SPIKEMIX_NUMERIC_HPP
