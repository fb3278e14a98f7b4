#ifndef SPIKEMIX_SSM_HPP
#define SPIKEMIX_SSM_HPP

#include <span>
#include <vector>

namespace spikemix {

// Per-cluster parameters. psi is never stored; it is always exp(log_psi).
struct ClusterParams {
  double mu = 0.0;       // shift of the latent log-odds at onset
  double log_psi = 0.0;  // log of the random-walk increment variance

  double psi() const;
  bool operator==(const ClusterParams&) const = default;
};

struct SSMConfig {
  double x0 = 0.0;         // baseline log-odds
  double psi0 = 1e-10;     // variance of the first transition
  int n_trials_bins = 1;   // binomial size (trials x sub-bins)
  int T = 1;               // series length

  bool operator==(const SSMConfig&) const = default;
};

struct SeriesObservations {
  std::vector<int> counts;
  SSMConfig config;
};

// Throws std::invalid_argument when an invariant is broken.
void validate(const ClusterParams& theta);
void validate(const SSMConfig& cfg);
void validate(const SeriesObservations& series);

double sigmoid(double x);
double logit(double p);

// log Binomial(y; n, p). p = 0 and p = 1 are handled as point masses.
double binomial_logpmf(int y, int n, double p);

// Initial density x1 ~ N(x0 + mu, psi0).
double h_logpdf(double x1, const ClusterParams& theta, const SSMConfig& cfg);
// Random-walk transition x_t ~ N(x_{t-1}, psi).
double f_logpdf(double x_prev, double x, const ClusterParams& theta);
// Binomial emission with success probability sigmoid(x), floored away from 0 and 1.
double g_logpdf(double x, int y, const SSMConfig& cfg);

// Logit of the mean proportion over a pre-stimulus window. Throws
// std::invalid_argument if the window is all-zero or saturated: the caller has
// to pick an explicit x0 or apply a pseudo-count.
double estimate_initial_state(std::span<const int> pre_counts, int n_per_bin);

// Emission log-densities for one series with the binomial coefficients cached.
// g(t, x) equals g_logpdf(x, counts[t], cfg) bit-for-bit.
class EmissionModel {
 public:
  explicit EmissionModel(const SeriesObservations& series);

  double operator()(int t, double x) const;
  int length() const { return static_cast<int>(y_.size()); }

 private:
  std::vector<double> y_;
  std::vector<double> n_minus_y_;
  std::vector<double> log_choose_;
};

}  // namespace spikemix

#endif  // SPIKEMIX_SSM_HPP
