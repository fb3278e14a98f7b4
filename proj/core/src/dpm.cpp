#include "spikemix/dpm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spikemix/error.hpp"
#include "spikemix/numeric.hpp"

namespace spikemix {
namespace {

constexpr std::uint64_t kAssignTag = 0x41;
constexpr std::uint64_t kPmmhTag = 0x50;
constexpr std::uint64_t kDrawTag = 0x44;
constexpr std::uint64_t kInitTag = 0x49;

// Runs f(0..n-1) on up to `workers` threads. Results must be written to
// per-index slots so that they do not depend on the schedule.
template <class F>
void parallel_for(int n, int workers, F&& f) {
  std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(1, workers)) schedule(dynamic) if (workers > 1)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(spikemix_parallel_error)
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

double estimate_or_neg_inf(const LikelihoodEstimate& est) {
  return est.degenerate ? kNegInf : est.log_likelihood;
}

// Draws an index from unnormalized log-probabilities. Ties and round-off
// at the top of the cumulative sum resolve to the lowest eligible index.
int sample_categorical(std::span<const double> log_w, double u) {
  std::vector<double> p(log_w.size());
  normalize_log_weights(log_w, p);
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) last_positive = static_cast<int>(j);
  }
  for (std::size_t j = 0; j < p.size(); ++j) {
    cumulative += p[j];
    if (u < cumulative && p[j] > 0.0) return static_cast<int>(j);
  }
  return last_positive;
}

std::vector<int> cluster_counts(const GibbsState& state) {
  std::vector<int> counts(state.params.size(), 0);
  for (int z : state.assignments) ++counts[z];
  return counts;
}

std::vector<int> members_of(const GibbsState& state, int k) {
  std::vector<int> members;
  for (std::size_t n = 0; n < state.assignments.size(); ++n)
    if (state.assignments[n] == k) members.push_back(static_cast<int>(n));
  return members;
}

GibbsState sample_assignment_dp(int n, const GibbsState& state, const SamplerContext& ctx,
                                std::uint64_t stream) {
  const Hyperparams& hp = ctx.hyper;
  Rng rng(derive_seed({stream, kDrawTag}));

  std::vector<int> counts = cluster_counts(state);
  const int old_label = state.assignments[n];
  --counts[old_label];

  std::vector<int> existing;  // labels of clusters that remain occupied without n
  std::vector<int> existing_counts;
  for (int k = 0; k < static_cast<int>(counts.size()); ++k) {
    if (counts[k] > 0) {
      existing.push_back(k);
      existing_counts.push_back(counts[k]);
    }
  }
  std::vector<ClusterParams> candidates;
  candidates.reserve(existing.size() + hp.m);
  for (int k : existing) candidates.push_back(state.params[k]);
  const bool emptied = counts[old_label] == 0;
  for (int j = 0; j < hp.m; ++j) {
    if (j == 0 && emptied)
      candidates.push_back(state.params[old_label]);
    else
      candidates.push_back(base_sample(hp.base, rng));
  }

  const auto prior = crp_prior_probs(existing_counts, hp.alpha, hp.m);
  std::vector<double> log_w(candidates.size());
  parallel_for(static_cast<int>(candidates.size()), ctx.workers, [&](int j) {
    const auto est = ctx.likelihood(n, candidates[j], derive_seed({stream, static_cast<std::uint64_t>(j)}));
    log_w[j] = std::log(prior[j]) + estimate_or_neg_inf(est);
  });
  if (std::none_of(log_w.begin(), log_w.end(), [](double v) { return std::isfinite(v); }))
    throw NumericalError("all candidate likelihoods are degenerate for series " + std::to_string(n));

  const int choice = sample_categorical(log_w, rng.uniform());
  GibbsState next = state;
  if (choice < static_cast<int>(existing.size())) {
    next.assignments[n] = existing[choice];
  } else {
    next.assignments[n] = static_cast<int>(next.params.size());
    next.params.push_back(candidates[choice]);
  }
  canonicalize(next);
  return next;
}

GibbsState sample_assignment_finite(int n, const GibbsState& state, const SamplerContext& ctx,
                                    std::uint64_t stream) {
  Rng rng(derive_seed({stream, kDrawTag}));
  std::vector<int> counts = cluster_counts(state);
  --counts[state.assignments[n]];
  const auto prior = finite_mixture_probs(counts, ctx.hyper.finite_alpha);
  const int K = state.num_clusters();
  std::vector<double> log_w(K);
  parallel_for(K, ctx.workers, [&](int k) {
    const auto est = ctx.likelihood(n, state.params[k], derive_seed({stream, static_cast<std::uint64_t>(k)}));
    log_w[k] = std::log(prior[k]) + estimate_or_neg_inf(est);
  });
  if (std::none_of(log_w.begin(), log_w.end(), [](double v) { return std::isfinite(v); }))
    throw NumericalError("all candidate likelihoods are degenerate for series " + std::to_string(n));
  GibbsState next = state;
  next.assignments[n] = sample_categorical(log_w, rng.uniform());
  return next;
}

ClusterParams draw_proposal(const ClusterParams& current, const std::array<double, 2>& sd,
                            std::uint64_t stream) {
  Rng rng(derive_seed({stream, kDrawTag, 0}));
  ClusterParams proposal;
  proposal.mu = rng.normal(current.mu, sd[0]);
  proposal.log_psi = rng.normal(current.log_psi, sd[1]);
  return proposal;
}

struct ClusterEstimate {
  std::vector<int> members;
  ClusterParams theta;
  double log_likelihood = 0.0;
};

}  // namespace

void validate(const BaseMeasure& base) {
  if (!(base.mu_var > 0.0)) throw std::invalid_argument("base measure: mu_var must be positive");
  if (!(base.logpsi_lo < base.logpsi_hi))
    throw std::invalid_argument("base measure: need logpsi_lo < logpsi_hi");
  if (!std::isfinite(base.mu_mean) || !std::isfinite(base.logpsi_lo) || !std::isfinite(base.logpsi_hi))
    throw std::invalid_argument("base measure: parameters must be finite");
}

void validate(const Hyperparams& hp) {
  validate(hp.base);
  if (!(hp.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (hp.m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(hp.proposal_sd[0] > 0.0) || !(hp.proposal_sd[1] > 0.0))
    throw std::invalid_argument("proposal_sd must be positive");
  if (hp.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (hp.burn_in < 0 || hp.burn_in >= hp.iterations)
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < iterations");
  if (hp.particles < 2) throw std::invalid_argument("particles must be >= 2");
  if (hp.csmc_rounds < 1) throw std::invalid_argument("csmc_rounds must be >= 1");
  if (hp.kind == MixtureKind::finite) {
    if (hp.finite_alpha.empty())
      throw std::invalid_argument("finite mixture needs one Dirichlet weight per cluster");
    for (double a : hp.finite_alpha)
      if (!(a > 0.0)) throw std::invalid_argument("finite mixture weights must be positive");
  }
}

ClusterParams base_sample(const BaseMeasure& base, Rng& rng) {
  ClusterParams theta;
  theta.mu = rng.normal(base.mu_mean, std::sqrt(base.mu_var));
  theta.log_psi = rng.uniform(base.logpsi_lo, base.logpsi_hi);
  return theta;
}

double base_logpdf(const BaseMeasure& base, const ClusterParams& theta) {
  if (theta.log_psi < base.logpsi_lo || theta.log_psi > base.logpsi_hi) return kNegInf;
  return gaussian_logpdf(theta.mu, base.mu_mean, base.mu_var) -
         std::log(base.logpsi_hi - base.logpsi_lo);
}

void validate(const GibbsState& state, std::size_t n_series, bool allow_empty_clusters) {
  if (state.assignments.size() != n_series)
    throw std::invalid_argument("state has " + std::to_string(state.assignments.size()) +
                                " assignments for " + std::to_string(n_series) + " series");
  const int K = state.num_clusters();
  if (K < 1) throw std::invalid_argument("state needs at least one cluster");
  std::vector<int> used(K, 0);
  for (int z : state.assignments) {
    if (z < 0 || z >= K) throw std::invalid_argument("assignment label out of range");
    used[z] = 1;
  }
  if (!allow_empty_clusters && std::find(used.begin(), used.end(), 0) != used.end())
    throw std::invalid_argument("state has an empty cluster");
  for (const auto& theta : state.params) validate(theta);
}

void canonicalize(GibbsState& state) {
  std::vector<int> relabel(state.params.size(), -1);
  std::vector<ClusterParams> params;
  for (int& z : state.assignments) {
    if (relabel[z] < 0) {
      relabel[z] = static_cast<int>(params.size());
      params.push_back(state.params[z]);
    }
    z = relabel[z];
  }
  state.params = std::move(params);
}

std::vector<double> crp_prior_probs(std::span<const int> counts, double alpha, int m) {
  if (!(alpha > 0.0)) throw std::invalid_argument("crp_prior_probs: alpha must be positive");
  if (m < 1) throw std::invalid_argument("crp_prior_probs: m must be >= 1");
  double total = 0.0;
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("crp_prior_probs: counts must be >= 1");
    total += c;
  }
  const double denom = total + alpha;
  std::vector<double> p;
  p.reserve(counts.size() + m);
  for (int c : counts) p.push_back(c / denom);
  for (int j = 0; j < m; ++j) p.push_back((alpha / m) / denom);
  return p;
}

std::vector<double> finite_mixture_probs(std::span<const int> counts,
                                         std::span<const double> alpha_vec) {
  if (counts.size() != alpha_vec.size())
    throw std::invalid_argument("finite_mixture_probs: size mismatch");
  double denom = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(alpha_vec[k] > 0.0)) throw std::invalid_argument("finite_mixture_probs: alpha must be positive");
    if (counts[k] < 0) throw std::invalid_argument("finite_mixture_probs: negative count");
    denom += counts[k] + alpha_vec[k];
  }
  std::vector<double> p(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = (counts[k] + alpha_vec[k]) / denom;
  return p;
}

SamplerContext::SamplerContext(const std::vector<SeriesObservations>& series, Hyperparams h,
                               LikelihoodFn fn, int n_workers)
    : data(&series), hyper(std::move(h)), likelihood(std::move(fn)), workers(n_workers) {
  if (!likelihood) {
    const CsmcOptions opts{hyper.particles, hyper.csmc_rounds, false};
    const auto* d = data;
    likelihood = [d, opts](int n, const ClusterParams& theta, std::uint64_t stream) {
      return csmc((*d)[n], theta, opts, stream).estimate;
    };
  }
}

GibbsState sample_assignment(int n, const GibbsState& state, const SamplerContext& ctx,
                             std::uint64_t stream) {
  if (n < 0 || n >= static_cast<int>(state.assignments.size()))
    throw std::invalid_argument("sample_assignment: series index out of range");
  if (ctx.hyper.kind == MixtureKind::finite) return sample_assignment_finite(n, state, ctx, stream);
  return sample_assignment_dp(n, state, ctx, stream);
}

bool metropolis_accept(double log_numerator, double log_denominator, double u) {
  const double log_a = log_numerator - log_denominator;
  if (std::isnan(log_a)) return false;
  return std::log(u) < log_a;
}

double proposal_logpdf(const ClusterParams& to, const ClusterParams& from,
                       const std::array<double, 2>& sd) {
  return gaussian_logpdf(to.mu, from.mu, sd[0] * sd[0]) +
         gaussian_logpdf(to.log_psi, from.log_psi, sd[1] * sd[1]);
}

PmmhResult pmmh_evaluate(int k, const ClusterParams& proposal, const GibbsState& state,
                         const SamplerContext& ctx, std::uint64_t stream,
                         const double* cached_log_likelihood) {
  if (k < 0 || k >= state.num_clusters()) throw std::invalid_argument("pmmh: cluster index out of range");
  const Hyperparams& hp = ctx.hyper;
  const ClusterParams& current = state.params[k];
  Rng rng(derive_seed({stream, kDrawTag, 1}));
  const double u = rng.uniform();

  PmmhResult out;
  out.state = state;
  const double prior_new = base_logpdf(hp.base, proposal);
  if (!std::isfinite(prior_new)) {
    out.log_acceptance = kNegInf;
    out.log_likelihood = cached_log_likelihood ? *cached_log_likelihood : std::nan("");
    return out;
  }

  const auto members = members_of(state, k);
  const int M = static_cast<int>(members.size());
  const bool need_current = cached_log_likelihood == nullptr;
  const int sides = need_current ? 2 : 1;
  std::vector<double> ll(static_cast<std::size_t>(M) * sides, 0.0);
  parallel_for(M * sides, ctx.workers, [&](int task) {
    const int i = task % M;
    const int side = task / M;  // 0 = proposal, 1 = current
    const ClusterParams& theta = side == 0 ? proposal : current;
    const auto seed = derive_seed({stream, static_cast<std::uint64_t>(members[i]),
                                   static_cast<std::uint64_t>(side)});
    ll[task] = estimate_or_neg_inf(ctx.likelihood(members[i], theta, seed));
  });
  out.ran_filters = M > 0;

  double ll_new = 0.0, ll_cur = 0.0;
  for (int i = 0; i < M; ++i) ll_new += ll[i];
  if (need_current) {
    for (int i = 0; i < M; ++i) ll_cur += ll[M + i];
  } else {
    ll_cur = *cached_log_likelihood;
  }

  const double log_num = prior_new + ll_new + proposal_logpdf(current, proposal, hp.proposal_sd);
  const double log_den =
      base_logpdf(hp.base, current) + ll_cur + proposal_logpdf(proposal, current, hp.proposal_sd);
  out.log_acceptance = log_num - log_den;
  out.accepted = metropolis_accept(log_num, log_den, u);
  if (out.accepted) out.state.params[k] = proposal;
  out.log_likelihood = out.accepted ? ll_new : ll_cur;
  return out;
}

PmmhResult pmmh_step(int k, const GibbsState& state, const SamplerContext& ctx,
                     std::uint64_t stream) {
  if (k < 0 || k >= state.num_clusters()) throw std::invalid_argument("pmmh: cluster index out of range");
  return pmmh_evaluate(k, draw_proposal(state.params[k], ctx.hyper.proposal_sd, stream), state,
                       ctx, stream);
}

GibbsState default_initial_state(std::size_t n_series, const Hyperparams& hyper,
                                 std::uint64_t seed) {
  Rng rng(derive_seed({seed, kInitTag}));
  GibbsState state;
  state.assignments.assign(n_series, 0);
  const int K = hyper.kind == MixtureKind::finite ? static_cast<int>(hyper.finite_alpha.size()) : 1;
  for (int k = 0; k < K; ++k) state.params.push_back(base_sample(hyper.base, rng));
  return state;
}

GibbsTrace gibbs_run(const SamplerContext& ctx, const GibbsState& init, std::uint64_t seed,
                     const IterationObserver& observer) {
  const Hyperparams& hp = ctx.hyper;
  validate(hp);
  const bool finite = hp.kind == MixtureKind::finite;
  validate(init, ctx.size(), finite);
  if (finite && init.num_clusters() != static_cast<int>(hp.finite_alpha.size()))
    throw std::invalid_argument("finite mixture: initial state must have one parameter per weight");
  const int N = static_cast<int>(ctx.size());

  GibbsTrace trace;
  trace.seed = seed;
  trace.hyper = hp;
  trace.samples.reserve(hp.iterations);

  GibbsState state = init;
  if (!finite) canonicalize(state);
  std::vector<ClusterEstimate> cache;

  for (int iter = 1; iter <= hp.iterations; ++iter) {
    const auto it = static_cast<std::uint64_t>(iter);
    try {
      for (int n = 0; n < N; ++n)
        state = sample_assignment(n, state, ctx,
                                  derive_seed({seed, it, kAssignTag, static_cast<std::uint64_t>(n)}));

      GibbsSample sample;
      sample.iteration = iter;
      sample.accepted.assign(state.num_clusters(), false);
      std::vector<ClusterEstimate> next_cache;
      for (int k = 0; k < state.num_clusters(); ++k) {
        const auto stream = derive_seed({seed, it, kPmmhTag, static_cast<std::uint64_t>(k)});
        const double* cached = nullptr;
        std::vector<int> members;
        if (hp.reuse_cluster_estimates) {
          members = members_of(state, k);
          for (const auto& entry : cache)
            if (entry.members == members && entry.theta == state.params[k]) cached = &entry.log_likelihood;
        }
        const auto proposal = draw_proposal(state.params[k], hp.proposal_sd, stream);
        PmmhResult res = pmmh_evaluate(k, proposal, state, ctx, stream, cached);
        sample.accepted[k] = res.accepted;
        state = std::move(res.state);
        if (hp.reuse_cluster_estimates && std::isfinite(res.log_likelihood))
          next_cache.push_back({members, state.params[k], res.log_likelihood});
      }
      cache = std::move(next_cache);
      sample.state = state;
      if (observer) observer(sample);
      trace.samples.push_back(std::move(sample));
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace spikemix
