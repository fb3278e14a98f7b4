#ifndef SPIKEMIX_ORACLE_HPP
#define SPIKEMIX_ORACLE_HPP

#include <functional>
#include <span>
#include <vector>

#include "spikemix/ssm.hpp"

namespace spikemix {

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int n_points = 2001;
};

// Uniform grid over x0 + mu +/- 8 max(sqrt(psi0), sqrt(T psi)), widened to
// cover logit((y_t + 0.5) / (n + 1)) +/- 1 for every observation.
GridSpec default_grid(const SeriesObservations& series, const ClusterParams& theta,
                      int n_points = 2001);

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

// Forward algorithm over a finite state space with per-step rescaling:
//   alpha_1(j) = initial(j) e_1(j)
//   alpha_t(j) = e_t(j) sum_i alpha_{t-1}(i) K_t(i, j)
// and returns log sum_j alpha_T(j) final_weights(j). Emissions are given in
// log space; transition(t) returns K_t for t = 1..T-1 (0-based step index).
// `on_step`, when set, sees each normalized alpha_t.
double forward_log_likelihood(
    std::span<const double> initial, const std::function<const DenseMatrix&(int)>& transition,
    const std::vector<std::vector<double>>& log_emissions, std::span<const double> final_weights,
    const std::function<void(int, std::span<const double>)>& on_step = {});

// Marginal log-likelihood by trapezoid quadrature on a uniform state grid.
// Throws NumericalError when the forward density at either grid boundary is
// not below 1e-12 of its peak at some t.
double grid_loglik(const SeriesObservations& series, const ClusterParams& theta,
                   const GridSpec& grid);

}  // namespace spikemix

#endif  // SPIKEMIX_ORACLE_HPP
