#include "spikemix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spikemix/error.hpp"
#include "spikemix/numeric.hpp"

namespace spikemix {
namespace {

constexpr double kBoundaryRatio = 1e-12;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x(n);
  const double dx = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) x[i] = lo + dx * i;
  x.back() = hi;
  return x;
}

std::vector<double> trapezoid_weights(double lo, double hi, int n) {
  const double dx = (hi - lo) / (n - 1);
  std::vector<double> w(n, dx);
  w.front() = w.back() = 0.5 * dx;
  return w;
}

// K(i, j) = w_i N(to_j; from_i, var)
DenseMatrix gaussian_kernel(const std::vector<double>& from, const std::vector<double>& from_w,
                            const std::vector<double>& to, double var) {
  DenseMatrix K(static_cast<int>(from.size()), static_cast<int>(to.size()));
  for (int i = 0; i < K.rows; ++i)
    for (int j = 0; j < K.cols; ++j) K(i, j) = from_w[i] * std::exp(gaussian_logpdf(to[j], from[i], var));
  return K;
}

}  // namespace

GridSpec default_grid(const SeriesObservations& series, const ClusterParams& theta,
                      int n_points) {
  const double center = series.config.x0 + theta.mu;
  const double half = 8.0 * std::max(std::sqrt(series.config.psi0),
                                     std::sqrt(series.config.T * theta.psi()));
  double lo = center - half, hi = center + half;
  // The filtered state follows the data even where the prior puts little
  // mass, so also cover the per-bin empirical log-odds with some margin.
  const double n = series.config.n_trials_bins;
  for (int y : series.counts) {
    const double x = logit((y + 0.5) / (n + 1.0));
    lo = std::min(lo, x - 1.0);
    hi = std::max(hi, x + 1.0);
  }
  return {lo, hi, n_points};
}

double forward_log_likelihood(
    std::span<const double> initial, const std::function<const DenseMatrix&(int)>& transition,
    const std::vector<std::vector<double>>& log_emissions, std::span<const double> final_weights,
    const std::function<void(int, std::span<const double>)>& on_step) {
  const int T = static_cast<int>(log_emissions.size());
  if (T == 0) throw std::invalid_argument("forward_log_likelihood: empty series");
  double loglik = 0.0;
  std::vector<double> alpha(initial.begin(), initial.end());
  std::vector<double> next;
  for (int t = 0; t < T; ++t) {
    if (t > 0) {
      const DenseMatrix& K = transition(t);
      if (K.rows != static_cast<int>(alpha.size()))
        throw std::invalid_argument("forward_log_likelihood: transition shape mismatch");
      next.assign(K.cols, 0.0);
      for (int i = 0; i < K.rows; ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        const double* row = K.data.data() + static_cast<std::size_t>(i) * K.cols;
        for (int j = 0; j < K.cols; ++j) next[j] += a * row[j];
      }
      alpha.swap(next);
    }
    const auto& le = log_emissions[t];
    if (le.size() != alpha.size())
      throw std::invalid_argument("forward_log_likelihood: emission shape mismatch");
    const double shift = *std::max_element(le.begin(), le.end());
    if (!std::isfinite(shift)) return kNegInf;
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      alpha[j] *= std::exp(le[j] - shift);
      total += alpha[j];
    }
    if (!(total > 0.0)) return kNegInf;
    for (double& a : alpha) a /= total;
    loglik += shift + std::log(total);
    if (on_step) on_step(t, alpha);
  }
  double mass = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    mass += alpha[j] * (final_weights.empty() ? 1.0 : final_weights[j]);
  return loglik + std::log(mass);
}

double grid_loglik(const SeriesObservations& series, const ClusterParams& theta,
                   const GridSpec& grid) {
  validate(series);
  validate(theta);
  if (!(grid.lo < grid.hi)) throw std::invalid_argument("grid: need lo < hi");
  if (grid.n_points < 101) throw std::invalid_argument("grid: need at least 101 points");
  const SSMConfig& cfg = series.config;
  const int T = cfg.T;
  const int n = grid.n_points;
  const double psi = theta.psi();

  const auto x = linspace(grid.lo, grid.hi, n);
  const auto w = trapezoid_weights(grid.lo, grid.hi, n);

  // The first state lives on its own grid when h is too narrow for the main one.
  const double init_mean = cfg.x0 + theta.mu;
  const double init_sd = std::sqrt(cfg.psi0);
  const double spacing = (grid.hi - grid.lo) / (n - 1);
  const bool local_init = init_sd < 20.0 * spacing;
  const auto x1 = local_init ? linspace(init_mean - 8.0 * init_sd, init_mean + 8.0 * init_sd, n) : x;
  const auto w1 = local_init
                      ? trapezoid_weights(init_mean - 8.0 * init_sd, init_mean + 8.0 * init_sd, n)
                      : w;

  std::vector<double> initial(n);
  for (int j = 0; j < n; ++j) initial[j] = std::exp(h_logpdf(x1[j], theta, cfg));

  std::vector<std::vector<double>> log_em(T, std::vector<double>(n));
  for (int t = 0; t < T; ++t) {
    const auto& xs = t == 0 ? x1 : x;
    for (int j = 0; j < n; ++j) log_em[t][j] = g_logpdf(xs[j], series.counts[t], cfg);
  }

  DenseMatrix first_step, main_step;
  if (T > 1) {
    main_step = gaussian_kernel(x, w, x, psi);
    if (local_init) first_step = gaussian_kernel(x1, w1, x, psi);
  }
  auto transition = [&](int t) -> const DenseMatrix& {
    return (t == 1 && local_init) ? first_step : main_step;
  };
  auto check_boundary = [&](int t, std::span<const double> alpha) {
    const double peak = *std::max_element(alpha.begin(), alpha.end());
    if (alpha.front() > kBoundaryRatio * peak || alpha.back() > kBoundaryRatio * peak)
      throw NumericalError("grid_loglik: state density at the grid boundary exceeds 1e-12 of its "
                           "peak at t = " + std::to_string(t + 1) + "; widen the grid");
  };
  const double ll = forward_log_likelihood(initial, transition, log_em, T == 1 ? w1 : w, check_boundary);
  // Every binomial emission is positive, so losing all mass means the grid missed the state.
  if (!std::isfinite(ll)) throw NumericalError("grid_loglik: no state mass on the grid; widen the grid");
  return ll;
}

}  // namespace spikemix
