#pragma once

#include <stdexcept>
#include <string>

namespace cic {

/// Invalid or incomplete run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written. The message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical parameters outside the validity domain of the harmonic model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not defined for the requested propagation mode (e.g. adiabatic
/// populations of a single-surface wavefunction).
class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values appeared during propagation (CLI exit code 3).
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// The objective decreased between two iterations of the monotonic scheme
/// (CLI exit code 4). Always a propagator or quadrature bug.
class MonotonicityFault : public std::runtime_error {
 public:
  MonotonicityFault(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace cic
