#ifndef SPIKEMIX_SMC_HPP
#define SPIKEMIX_SMC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "spikemix/random.hpp"
#include "spikemix/ssm.hpp"

namespace spikemix {

// Log-quadratic twisting functions gamma_t(x) = exp(-a_t x^2 - b_t x - c_t).
// (a, b, c) hold the increments fitted in the latest refinement round and
// (A, B, C) the cumulative policy actually used to twist the model.
struct Policy {
  std::vector<double> a, b, c;
  std::vector<double> A, B, C;

  static Policy identity(int T);
  int length() const { return static_cast<int>(A.size()); }
  bool is_identity() const;
};

// Row t of each matrix is stored contiguously: entry (s, t) lives at t * S + s.
struct ParticleCloud {
  int S = 0;
  int T = 0;
  std::vector<double> positions;           // T x S
  std::vector<double> normalized_weights;  // T x S
  std::vector<int> ancestors;              // (T - 1) x S; ancestors of the particles at t + 1

  double position(int s, int t) const { return positions[static_cast<std::size_t>(t) * S + s]; }
  double weight(int s, int t) const { return normalized_weights[static_cast<std::size_t>(t) * S + s]; }
  int ancestor(int s, int t) const { return ancestors[static_cast<std::size_t>(t) * S + s]; }
  std::span<const double> positions_at(int t) const {
    return {positions.data() + static_cast<std::size_t>(t) * S, static_cast<std::size_t>(S)};
  }
};

struct LikelihoodEstimate {
  double log_likelihood = 0.0;
  bool degenerate = false;  // some weight column underflowed entirely
};

// Systematic resampling on the grid (u + s) / S. The output is sorted and
// deterministic given (weights, u). Throws std::invalid_argument on negative
// weights or when the weights do not sum to 1 within 1e-9.
std::vector<int> systematic_resample(std::span<const double> weights, double u);
void systematic_resample(std::span<const double> weights, double u, std::span<int> out);

struct BpfResult {
  ParticleCloud cloud;
  LikelihoodEstimate estimate;
};

// Bootstrap particle filter with resampling at every step. RNG use: S normals
// at t = 1, then per step one uniform for resampling followed by S normals.
BpfResult bpf(const SeriesObservations& series, const ClusterParams& theta, int S, Rng& rng);

struct QuadraticFit {
  double a = 0.0, b = 0.0, c = 0.0;
  bool constrained = false;    // unconstrained curvature violated a_lower
  bool rank_deficient = false;  // fewer than three distinct particle positions
};

// Least-squares fit of -(a x^2 + b x + c) to log_gamma_star over the
// particles subject to a > a_lower.
QuadraticFit fit_quadratic_policy(std::span<const double> xs,
                                  std::span<const double> log_gamma_star, double a_lower);

struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// N(x; x_prev, psi) * exp(-A x^2 - B x) renormalized.
GaussianMoments twisted_transition(double x_prev, double A, double B, double psi);

// log of the integral of N(x; x_prev, v) * exp(-A x^2 - B x - C) over x.
double log_twisted_normalizer(double x_prev, double A, double B, double C, double v);

struct CsmcOptions {
  int particles = 64;
  int rounds = 3;
  bool force_identity_policy = false;  // test hook: every fit returns (0, 0, 0)
};

struct CsmcResult {
  LikelihoodEstimate estimate;  // from the final twisted filter
  Policy policy;                // cumulative policy of the final round
  int fallbacks = 0;            // fits replaced by identity coefficients
};

// Seed of the stream used by filter pass `pass` (0 = initial BPF) of a cSMC run.
std::uint64_t csmc_pass_seed(std::uint64_t stream, int pass);

// Controlled SMC: an initial BPF followed by `rounds` iterations of
// approximate backward recursion and a forward twisted filter. Returns the
// final round's estimate of log p(y | theta).
CsmcResult csmc(const SeriesObservations& series, const ClusterParams& theta,
                const CsmcOptions& options, std::uint64_t stream);

}  // namespace spikemix

#endif  // SPIKEMIX_SMC_HPP
