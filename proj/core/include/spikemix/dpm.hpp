#ifndef SPIKEMIX_DPM_HPP
#define SPIKEMIX_DPM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spikemix/random.hpp"
#include "spikemix/smc.hpp"
#include "spikemix/ssm.hpp"

namespace spikemix {

// G = Normal(mu_mean, mu_var) x Uniform(logpsi_lo, logpsi_hi). mu_var is a variance.
struct BaseMeasure {
  double mu_mean = 0.0;
  double mu_var = 2.0;
  double logpsi_lo = -15.0;
  double logpsi_hi = 0.0;

  bool operator==(const BaseMeasure&) const = default;
};

enum class MixtureKind { dirichlet_process, finite };

struct Hyperparams {
  double alpha = 1.0;
  BaseMeasure base;
  int m = 5;                                     // auxiliary candidates per assignment
  std::array<double, 2> proposal_sd{0.5, 0.5};  // random-walk sd on (mu, log psi)
  int iterations = 10000;
  int burn_in = 1000;
  int particles = 64;
  int csmc_rounds = 3;

  MixtureKind kind = MixtureKind::dirichlet_process;
  std::vector<double> finite_alpha;  // Dirichlet weights, one per cluster (finite mixtures only)

  // Reuse a cluster's summed log-likelihood as the PMMH denominator while its
  // membership and parameters are unchanged, instead of re-estimating it.
  bool reuse_cluster_estimates = false;

  bool operator==(const Hyperparams&) const = default;
};

void validate(const BaseMeasure& base);
void validate(const Hyperparams& hyper);

ClusterParams base_sample(const BaseMeasure& base, Rng& rng);
double base_logpdf(const BaseMeasure& base, const ClusterParams& theta);

struct GibbsState {
  std::vector<int> assignments;
  std::vector<ClusterParams> params;

  int num_clusters() const { return static_cast<int>(params.size()); }
  bool operator==(const GibbsState&) const = default;
};

// For the DP sampler: labels are 0..K-1 and every label is used.
void validate(const GibbsState& state, std::size_t n_series, bool allow_empty_clusters = false);

// Relabels clusters by order of first appearance in the assignments and
// drops parameters of clusters nobody is assigned to.
void canonicalize(GibbsState& state);

struct GibbsSample {
  int iteration = 0;  // 1-based
  GibbsState state;
  std::vector<bool> accepted;  // PMMH outcome per cluster

  bool operator==(const GibbsSample&) const = default;
};

struct GibbsTrace {
  std::vector<GibbsSample> samples;
  std::uint64_t seed = 0;
  Hyperparams hyper;

  bool operator==(const GibbsTrace&) const = default;
};

// Prior probabilities of joining each existing cluster (by size) or each of
// the m auxiliary clusters (alpha / m each), normalized by N - 1 + alpha.
std::vector<double> crp_prior_probs(std::span<const int> counts, double alpha, int m);

// Dirichlet-multinomial conditional (counts[k] + alpha[k]) / (N - 1 + sum alpha).
std::vector<double> finite_mixture_probs(std::span<const int> counts,
                                         std::span<const double> alpha_vec);

// Estimates log p(y^(n) | theta) using the given stream seed.
using LikelihoodFn =
    std::function<LikelihoodEstimate(int series_index, const ClusterParams& theta, std::uint64_t stream)>;

struct SamplerContext {
  const std::vector<SeriesObservations>* data = nullptr;
  Hyperparams hyper;
  LikelihoodFn likelihood;  // defaults to cSMC with hyper.particles / hyper.csmc_rounds
  int workers = 1;

  SamplerContext(const std::vector<SeriesObservations>& series, Hyperparams h,
                 LikelihoodFn fn = {}, int n_workers = 1);
  std::size_t size() const { return data->size(); }
};

// Samples z^(n) given everything else (auxiliary-variable scheme with m
// candidates; an emptied cluster's parameters occupy the first auxiliary slot).
GibbsState sample_assignment(int n, const GibbsState& state, const SamplerContext& ctx,
                             std::uint64_t stream);

struct PmmhResult {
  GibbsState state;
  bool accepted = false;
  bool ran_filters = false;
  double log_acceptance = 0.0;
  double log_likelihood = 0.0;  // summed member log-likelihood at the retained parameters
};

// Accept iff log(u) < log_numerator - log_denominator.
bool metropolis_accept(double log_numerator, double log_denominator, double u);

double proposal_logpdf(const ClusterParams& to, const ClusterParams& from,
                       const std::array<double, 2>& sd);

// One PMMH move on cluster k with the proposal drawn from the stream.
PmmhResult pmmh_step(int k, const GibbsState& state, const SamplerContext& ctx,
                     std::uint64_t stream);

// The accept/reject half of pmmh_step for a given proposal. If
// `cached_log_likelihood` is set it is used as the current parameters'
// likelihood instead of fresh estimates.
PmmhResult pmmh_evaluate(int k, const ClusterParams& proposal, const GibbsState& state,
                         const SamplerContext& ctx, std::uint64_t stream,
                         const double* cached_log_likelihood = nullptr);

// All series in one cluster with parameters drawn from the base measure.
GibbsState default_initial_state(std::size_t n_series, const Hyperparams& hyper,
                                 std::uint64_t seed);

using IterationObserver = std::function<void(const GibbsSample&)>;

// Runs hyper.iterations sweeps of assignments then parameters. Deterministic
// given (data, hyper, init, seed) and independent of ctx.workers.
GibbsTrace gibbs_run(const SamplerContext& ctx, const GibbsState& init, std::uint64_t seed,
                     const IterationObserver& observer = {});

}  // namespace spikemix

#endif  // SPIKEMIX_DPM_HPP
