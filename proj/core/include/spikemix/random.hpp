#ifndef SPIKEMIX_RANDOM_HPP
#define SPIKEMIX_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace spikemix {

// SplitMix64 finalizer. Used to turn structured task keys into well-mixed
// engine seeds so that independent tasks get statistically independent
// streams regardless of the order they are scheduled in.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

// An isolated, seedable random stream. Every filter invocation owns one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  int binomial(int n, double p) { return std::binomial_distribution<int>(n, p)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  // Ziggurat sampler; several times cheaper than the polar method in libstdc++.
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace spikemix

#endif  // SPIKEMIX_RANDOM_HPP
