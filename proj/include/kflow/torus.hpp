#pragma once

#include <array>
#include <cmath>

namespace kflow {

// Flat torus [0,2pi] x [0,2pi*beta] with Fourier modes truncated to
// |k|_inf <= trunc. Integer index k maps to the physical wavevector
// kappa(k) = (k1, k2/beta).
struct TorusSpec {
  double beta = 1.0;
  int trunc = 1;

  int edge() const { return 2 * trunc + 1; }
  int mode_count() const { return edge() * edge(); }
  double area() const { return 4.0 * M_PI * M_PI * beta; }

  bool operator==(const TorusSpec&) const = default;
};

struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  bool operator==(const ModeIndex&) const = default;
};

inline std::array<double, 2> wavenumber(const TorusSpec& torus, ModeIndex k) {
  return {static_cast<double>(k.k1), static_cast<double>(k.k2) / torus.beta};
}

inline double wavenumber_sq(const TorusSpec& torus, ModeIndex k) {
  const double k2b = static_cast<double>(k.k2) / torus.beta;
  return static_cast<double>(k.k1) * k.k1 + k2b * k2b;
}

}  // namespace kflow
