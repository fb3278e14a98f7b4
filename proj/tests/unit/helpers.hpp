#ifndef SPIKEMIX_TEST_HELPERS_HPP
#define SPIKEMIX_TEST_HELPERS_HPP

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "spikemix/ssm.hpp"

namespace testing {

// Five-step toy series used across the filter and oracle suites.
inline spikemix::SeriesObservations toy_series() {
  spikemix::SeriesObservations s;
  s.counts = {5, 9, 7, 8, 6};
  s.config.x0 = -3.0;
  s.config.psi0 = 1e-10;
  s.config.n_trials_bins = 225;
  s.config.T = 5;
  return s;
}

inline const spikemix::ClusterParams kToyTheta{1.0, -4.0};

// Reference value from tests/oracles/toy_loglik.py (Simpson rule at 4001 and
// 8001 points; the two agree to 1e-14).
inline constexpr double kToyLogLik = -40.38458528991048;

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("spikemix_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace testing

#endif  // SPIKEMIX_TEST_HELPERS_HPP
