#include "spikemix/smc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spikemix/numeric.hpp"

namespace spikemix {
namespace {

// log F(x) for the cumulative coefficients at one time step, expanded as a
// quadratic in x: log_twisted_normalizer(x, A, B, C, v) = qa x^2 + qb x + qc.
struct LogQuadratic {
  double qa = 0.0, qb = 0.0, qc = 0.0;
  double operator()(double x) const { return qa * x * x + qb * x + qc; }
};

LogQuadratic normalizer_quadratic(double A, double B, double C, double v) {
  const double P = 1.0 + 2.0 * A * v;
  if (!(P > 0.0)) throw std::domain_error("twisted normalizer: 1 + 2 A v must be positive");
  return {-A / P, -B / P, -0.5 * std::log(P) + B * B * v / (2.0 * P) - C};
}

// -log Gamma_t(x) for the cumulative coefficients at t.
LogQuadratic inverse_twist(const Policy& policy, int t) {
  return {policy.A[t], policy.B[t], policy.C[t]};
}

LogQuadratic operator+(LogQuadratic l, const LogQuadratic& r) {
  return {l.qa + r.qa, l.qb + r.qb, l.qc + r.qc};
}

// Particle storage shared by the passes of one cSMC run.
struct PassBuffers {
  PassBuffers(int T, int S)
      : x(static_cast<std::size_t>(T) * S), log_g(static_cast<std::size_t>(T) * S),
        lw(S), w(S), idx(S) {}
  std::vector<double> x;      // T x S particle positions
  std::vector<double> log_g;  // T x S emission log-densities at those positions
  std::vector<double> lw, w;
  std::vector<int> idx;
};

// One forward filter on the model twisted by `policy` (nullptr = untwisted).
// Consumes the stream in the same order as bpf(), so an identity policy
// reproduces bpf() exactly.
LikelihoodEstimate forward_pass(const EmissionModel& g, double initial_mean, double psi0,
                                double psi, const Policy* policy, int S, Rng& rng,
                                PassBuffers& buf) {
  const int T = g.length();
  const double log_S = std::log(static_cast<double>(S));
  LikelihoodEstimate est;
  for (int t = 0; t < T; ++t) {
    const double v = t == 0 ? psi0 : psi;
    double A = 0.0, B = 0.0;
    LogQuadratic correction;
    if (policy) {
      A = policy->A[t];
      B = policy->B[t];
      correction = inverse_twist(*policy, t);
      if (t + 1 < T)
        correction = correction +
                     normalizer_quadratic(policy->A[t + 1], policy->B[t + 1], policy->C[t + 1], psi);
      if (t == 0) correction.qc += log_twisted_normalizer(initial_mean, A, B, policy->C[0], psi0);
    }
    const double P = 1.0 + 2.0 * A * v;
    const double sd = std::sqrt(v / P);
    double* xt = buf.x.data() + static_cast<std::size_t>(t) * S;
    double* lgt = buf.log_g.data() + static_cast<std::size_t>(t) * S;
    if (t == 0) {
      const double mean = (initial_mean - B * v) / P;
      for (int s = 0; s < S; ++s) xt[s] = rng.normal(mean, sd);
    } else {
      systematic_resample(buf.w, rng.uniform(), buf.idx);
      const double* xp = xt - S;
      for (int s = 0; s < S; ++s) xt[s] = rng.normal((xp[buf.idx[s]] - B * v) / P, sd);
    }
    for (int s = 0; s < S; ++s) {
      lgt[s] = g(t, xt[s]);
      buf.lw[s] = policy ? lgt[s] + correction(xt[s]) : lgt[s];
    }
    const double lse = normalize_log_weights(buf.lw, buf.w);
    if (!std::isfinite(lse) || std::isnan(lse)) {
      est.degenerate = true;
      est.log_likelihood = kNegInf;
      return est;
    }
    est.log_likelihood += lse - log_S;
  }
  return est;
}

bool solve_linear(std::array<std::array<double, 3>, 3> G, std::array<double, 3> h, int n,
                  std::array<double, 3>& out) {
  // Gaussian elimination with partial pivoting on an n x n leading block.
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(G[i][i]));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
    if (!(std::abs(G[piv][col]) > 1e-10 * scale)) return false;
    std::swap(G[piv], G[col]);
    std::swap(h[piv], h[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = G[r][col] / G[col][col];
      for (int k = col; k < n; ++k) G[r][k] -= f * G[col][k];
      h[r] -= f * h[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = h[r];
    for (int k = r + 1; k < n; ++k) acc -= G[r][k] * out[k];
    out[r] = acc / G[r][r];
  }
  return true;
}

}  // namespace

Policy Policy::identity(int T) {
  const auto zeros = std::vector<double>(static_cast<std::size_t>(T), 0.0);
  return {zeros, zeros, zeros, zeros, zeros, zeros};
}

bool Policy::is_identity() const {
  auto all_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  return all_zero(a) && all_zero(b) && all_zero(c) && all_zero(A) && all_zero(B) && all_zero(C);
}

void systematic_resample(std::span<const double> weights, double u, std::span<int> out) {
  const std::size_t S = weights.size();
  if (S == 0 || out.size() != S) throw std::invalid_argument("systematic_resample: size mismatch");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("systematic_resample: u outside [0, 1)");
  double total = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < S; ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("systematic_resample: negative weight");
    if (weights[i] > 0.0) last_positive = i;
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("systematic_resample: weights sum to " + std::to_string(total));

  const double step = 1.0 / static_cast<double>(S);
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t s = 0; s < S; ++s) {
    const double point = (u + static_cast<double>(s)) * step;
    while (cumulative <= point && j < last_positive) cumulative += weights[++j];
    out[s] = static_cast<int>(j);
  }
}

std::vector<int> systematic_resample(std::span<const double> weights, double u) {
  std::vector<int> out(weights.size());
  systematic_resample(weights, u, out);
  return out;
}

BpfResult bpf(const SeriesObservations& series, const ClusterParams& theta, int S, Rng& rng) {
  if (S < 2) throw std::invalid_argument("bpf: need at least 2 particles");
  validate(theta);
  const EmissionModel g(series);
  const int T = series.config.T;
  const double psi = theta.psi();
  const double log_S = std::log(static_cast<double>(S));

  BpfResult out;
  ParticleCloud& cloud = out.cloud;
  cloud.S = S;
  cloud.T = T;
  cloud.positions.assign(static_cast<std::size_t>(T) * S, 0.0);
  cloud.normalized_weights.assign(static_cast<std::size_t>(T) * S, 0.0);
  cloud.ancestors.assign(static_cast<std::size_t>(std::max(T - 1, 0)) * S, 0);

  std::vector<double> lw(S);
  const double init_mean = series.config.x0 + theta.mu;
  const double init_sd = std::sqrt(series.config.psi0);
  const double sd = std::sqrt(psi);
  for (int t = 0; t < T; ++t) {
    double* xt = cloud.positions.data() + static_cast<std::size_t>(t) * S;
    if (t == 0) {
      for (int s = 0; s < S; ++s) xt[s] = rng.normal(init_mean, init_sd);
    } else {
      std::span<int> anc(cloud.ancestors.data() + static_cast<std::size_t>(t - 1) * S, S);
      const std::span<const double> prev_w(
          cloud.normalized_weights.data() + static_cast<std::size_t>(t - 1) * S, S);
      systematic_resample(prev_w, rng.uniform(), anc);
      const double* xp = xt - S;
      for (int s = 0; s < S; ++s) xt[s] = rng.normal(xp[anc[s]], sd);
    }
    for (int s = 0; s < S; ++s) lw[s] = g(t, xt[s]);
    const double lse = normalize_log_weights(
        lw, std::span<double>(cloud.normalized_weights.data() + static_cast<std::size_t>(t) * S, S));
    if (!std::isfinite(lse) || std::isnan(lse)) {
      out.estimate = {kNegInf, true};
      return out;
    }
    out.estimate.log_likelihood += lse - log_S;
  }
  return out;
}

QuadraticFit fit_quadratic_policy(std::span<const double> xs,
                                  std::span<const double> log_gamma_star, double a_lower) {
  const std::size_t n = xs.size();
  if (n == 0 || log_gamma_star.size() != n)
    throw std::invalid_argument("fit_quadratic_policy: size mismatch");
  double m = 0.0, target_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(log_gamma_star[i]))
      throw std::invalid_argument("fit_quadratic_policy: non-finite input");
    m += xs[i];
    target_mean += log_gamma_star[i];
  }
  m /= static_cast<double>(n);
  target_mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  const double s = std::sqrt(var / static_cast<double>(n));
  const double eps = 1e-6 * std::max(1.0, std::abs(a_lower));

  QuadraticFit fit;
  auto flat = [&] {
    fit.rank_deficient = true;
    fit.a = a_lower < 0.0 ? 0.0 : a_lower + eps;
    fit.b = 0.0;
    fit.c = -target_mean;
    return fit;
  };
  if (!(s > 1e-12 * std::max(1.0, std::abs(m)))) return flat();

  // Regress r = -log gamma* on (u^2, u, 1) with u = (x - m) / s, then map
  // the coefficients back to x.
  std::array<std::array<double, 3>, 3> G{};
  std::array<double, 3> h{};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (xs[i] - m) / s;
    const std::array<double, 3> phi{u * u, u, 1.0};
    const double r = -log_gamma_star[i];
    for (int p = 0; p < 3; ++p) {
      h[p] += phi[p] * r;
      for (int q = 0; q < 3; ++q) G[p][q] += phi[p] * phi[q];
    }
  }
  std::array<double, 3> coef{};
  if (!solve_linear(G, h, 3, coef)) return flat();

  double a = coef[0] / (s * s);
  double beta = coef[1], kappa = coef[2];
  if (a <= a_lower) {
    fit.constrained = true;
    a = a_lower + eps;
    const double alpha = a * s * s;
    std::array<std::array<double, 3>, 3> G2{};
    std::array<double, 3> h2{};
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (xs[i] - m) / s;
      const double r = -log_gamma_star[i] - alpha * u * u;
      G2[0][0] += u * u;
      G2[0][1] += u;
      G2[1][0] += u;
      G2[1][1] += 1.0;
      h2[0] += u * r;
      h2[1] += r;
    }
    std::array<double, 3> c2{};
    if (!solve_linear(G2, h2, 2, c2)) return flat();
    beta = c2[0];
    kappa = c2[1];
  }
  fit.a = a;
  fit.b = beta / s - 2.0 * a * m;
  fit.c = kappa - a * m * m - fit.b * m;
  return fit;
}

GaussianMoments twisted_transition(double x_prev, double A, double B, double psi) {
  const double P = 1.0 + 2.0 * A * psi;
  if (!(psi > 0.0) || !(P > 0.0))
    throw std::domain_error("twisted_transition: non-positive precision (policy constraint violated)");
  return {(x_prev - B * psi) / P, psi / P};
}

double log_twisted_normalizer(double x_prev, double A, double B, double C, double v) {
  const double P = 1.0 + 2.0 * A * v;
  if (!(v > 0.0) || !(P > 0.0))
    throw std::domain_error("log_twisted_normalizer: 1 + 2 A v must be positive");
  return -0.5 * std::log(P) - (A * x_prev * x_prev + B * x_prev - 0.5 * B * B * v) / P - C;
}

std::uint64_t csmc_pass_seed(std::uint64_t stream, int pass) {
  return derive_seed({stream, 0x63736d63ULL, static_cast<std::uint64_t>(pass)});
}

CsmcResult csmc(const SeriesObservations& series, const ClusterParams& theta,
                const CsmcOptions& options, std::uint64_t stream) {
  const int S = options.particles;
  const int L = options.rounds;
  if (S < 2) throw std::invalid_argument("csmc: need at least 2 particles");
  if (L < 1) throw std::invalid_argument("csmc: need at least 1 refinement round");
  validate(theta);
  const EmissionModel g(series);
  const int T = series.config.T;
  const double psi0 = series.config.psi0;
  const double psi = theta.psi();
  const double initial_mean = series.config.x0 + theta.mu;

  CsmcResult out;
  out.policy = Policy::identity(T);
  PassBuffers buf(T, S);
  {
    Rng rng(csmc_pass_seed(stream, 0));
    out.estimate = forward_pass(g, initial_mean, psi0, psi, nullptr, S, rng, buf);
    if (out.estimate.degenerate) return out;
  }

  std::vector<double> target(S);
  for (int round = 1; round <= L; ++round) {
    const Policy& prev = out.policy;
    Policy next = prev;
    for (int t = T - 1; t >= 0; --t) {
      const double v = t == 0 ? psi0 : psi;
      const double* xt = buf.x.data() + static_cast<std::size_t>(t) * S;
      const double* lgt = buf.log_g.data() + static_cast<std::size_t>(t) * S;
      // log gamma*_t = log g^{Gamma'}_t + log F^{Gamma}_{t+1} - log F^{Gamma'}_{t+1}
      LogQuadratic prev_weight = inverse_twist(prev, t);
      LogQuadratic ratio;
      if (t + 1 < T) {
        const LogQuadratic f_prev =
            normalizer_quadratic(prev.A[t + 1], prev.B[t + 1], prev.C[t + 1], psi);
        const LogQuadratic f_next =
            normalizer_quadratic(next.A[t + 1], next.B[t + 1], next.C[t + 1], psi);
        prev_weight = prev_weight + f_prev;
        ratio = {f_next.qa - f_prev.qa, f_next.qb - f_prev.qb, f_next.qc - f_prev.qc};
      }
      bool finite = true;
      for (int s = 0; s < S; ++s) {
        target[s] = (lgt[s] + prev_weight(xt[s])) + ratio(xt[s]);
        finite = finite && std::isfinite(target[s]);
      }

      QuadraticFit fit;
      if (!options.force_identity_policy) {
        const double a_lower = -1.0 / (2.0 * v) - prev.A[t];
        if (finite) fit = fit_quadratic_policy(std::span<const double>(xt, S), target, a_lower);
        const bool ok = finite && std::isfinite(fit.a) && std::isfinite(fit.b) &&
                        std::isfinite(fit.c) && fit.a > a_lower;
        if (!ok) {
          fit = QuadraticFit{};
          ++out.fallbacks;
        }
      }
      next.a[t] = fit.a;
      next.b[t] = fit.b;
      next.c[t] = fit.c;
      next.A[t] = prev.A[t] + fit.a;
      next.B[t] = prev.B[t] + fit.b;
      next.C[t] = prev.C[t] + fit.c;
    }
    out.policy = std::move(next);
    Rng rng(csmc_pass_seed(stream, round));
    out.estimate = forward_pass(g, initial_mean, psi0, psi, &out.policy, S, rng, buf);
    if (out.estimate.degenerate) return out;
  }
  return out;
}

}  // namespace spikemix
