#ifndef SPIKEMIX_ERROR_HPP
#define SPIKEMIX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace spikemix {

// Malformed configuration, dataset or trace files. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filters that degenerate or oracles whose grid cannot hold the state mass.
// Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spikemix

#endif  // SPIKEMIX_ERROR_HPP
