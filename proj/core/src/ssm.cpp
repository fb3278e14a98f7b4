#include "spikemix/ssm.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spikemix/numeric.hpp"

namespace spikemix {
namespace {

constexpr double kLogProbFloor = -690.77552789821368;      // log(1e-300)
constexpr double kLogOneMinusFloor = -36.841361487904734;  // log(1e-16)

double log_choose(int n, int y) {
  return std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
}

// y log p + (n - y) log(1 - p) with p = sigmoid(x), clamped to [1e-300, 1 - 1e-16].
inline double binomial_kernel(double x, double y, double n_minus_y) {
  // softplus(x) and softplus(-x) share the log1p(exp(-|x|)) tail.
  const double tail = std::log1p(std::exp(-std::abs(x)));
  const double log_p = std::max(-(std::max(-x, 0.0) + tail), kLogProbFloor);
  const double log_q = std::max(-(std::max(x, 0.0) + tail), kLogOneMinusFloor);
  return y * log_p + n_minus_y * log_q;
}

}  // namespace

double ClusterParams::psi() const { return std::exp(log_psi); }

void validate(const ClusterParams& theta) {
  if (!std::isfinite(theta.mu) || !std::isfinite(theta.log_psi) || !(theta.psi() > 0.0))
    throw std::invalid_argument("cluster parameters must be finite with exp(log_psi) > 0");
}

void validate(const SSMConfig& cfg) {
  if (!(cfg.psi0 > 0.0) || !std::isfinite(cfg.psi0))
    throw std::invalid_argument("psi0 must be positive and finite");
  if (!std::isfinite(cfg.x0)) throw std::invalid_argument("x0 must be finite");
  if (cfg.n_trials_bins < 1) throw std::invalid_argument("binomial size must be >= 1");
  if (cfg.T < 1) throw std::invalid_argument("series length must be >= 1");
}

void validate(const SeriesObservations& series) {
  validate(series.config);
  if (static_cast<int>(series.counts.size()) != series.config.T)
    throw std::invalid_argument("counts length " + std::to_string(series.counts.size()) +
                                " does not match T = " + std::to_string(series.config.T));
  for (std::size_t t = 0; t < series.counts.size(); ++t) {
    const int y = series.counts[t];
    if (y < 0 || y > series.config.n_trials_bins)
      throw std::invalid_argument("count " + std::to_string(y) + " at t = " + std::to_string(t) +
                                  " outside [0, " + std::to_string(series.config.n_trials_bins) +
                                  "]");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double binomial_logpmf(int y, int n, double p) {
  if (n < 0 || y < 0 || y > n) throw std::invalid_argument("binomial_logpmf: need 0 <= y <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_logpmf: p outside [0, 1]");
  if (p == 0.0) return y == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return y == n ? 0.0 : kNegInf;
  return log_choose(n, y) + y * std::log(p) + (n - y) * std::log1p(-p);
}

double h_logpdf(double x1, const ClusterParams& theta, const SSMConfig& cfg) {
  return gaussian_logpdf(x1, cfg.x0 + theta.mu, cfg.psi0);
}

double f_logpdf(double x_prev, double x, const ClusterParams& theta) {
  return gaussian_logpdf(x, x_prev, theta.psi());
}

double g_logpdf(double x, int y, const SSMConfig& cfg) {
  const int n = cfg.n_trials_bins;
  if (y < 0 || y > n) throw std::invalid_argument("g_logpdf: count outside [0, n]");
  return log_choose(n, y) + binomial_kernel(x, y, static_cast<double>(n - y));
}

double estimate_initial_state(std::span<const int> pre_counts, int n_per_bin) {
  if (pre_counts.empty()) throw std::invalid_argument("pre-stimulus window is empty");
  if (n_per_bin < 1) throw std::invalid_argument("binomial size must be >= 1");
  const long long total = std::accumulate(pre_counts.begin(), pre_counts.end(), 0LL);
  const long long max_total = static_cast<long long>(pre_counts.size()) * n_per_bin;
  if (total <= 0 || total >= max_total)
    throw std::invalid_argument(
        "pre-stimulus window is " + std::string(total <= 0 ? "all-zero" : "saturated") +
        "; supply an explicit x0 or add a pseudo-count");
  return logit(static_cast<double>(total) / static_cast<double>(max_total));
}

EmissionModel::EmissionModel(const SeriesObservations& series) {
  validate(series);
  const int n = series.config.n_trials_bins;
  y_.reserve(series.counts.size());
  n_minus_y_.reserve(series.counts.size());
  log_choose_.reserve(series.counts.size());
  for (int y : series.counts) {
    y_.push_back(y);
    n_minus_y_.push_back(n - y);
    log_choose_.push_back(log_choose(n, y));
  }
}

double EmissionModel::operator()(int t, double x) const {
  return log_choose_[t] + binomial_kernel(x, y_[t], n_minus_y_[t]);
}

}  // namespace spikemix
