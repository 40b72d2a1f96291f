#pragma once

#include <stdexcept>
#include <string>

namespace kflow {

// Invalid parameters or malformed input files.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Time integration stalled (step size underflow).
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, double time, double norm)
      : std::runtime_error(what), time(time), norm(norm) {}
  double time;
  double norm;
};

// Newton hit a (near-)singular Jacobian, i.e. a bifurcation point.
struct SingularJacobianError : std::runtime_error {
  explicit SingularJacobianError(const std::string& what) : std::runtime_error(what) {}
};

// Bisection bracket does not straddle an eigenvalue crossing.
struct BracketError : std::runtime_error {
  BracketError(const std::string& what, double re_lo, double re_hi)
      : std::runtime_error(what), re_lo(re_lo), re_hi(re_hi) {}
  double re_lo;
  double re_hi;
};

// Rank-deficient least-squares design.
struct FitError : std::runtime_error {
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kflow
