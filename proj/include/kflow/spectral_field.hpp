#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kflow/torus.hpp"

namespace kflow {

using Complex = std::complex<double>;

enum class NormConvention { Coefficient, Integral };

// Real scalar field on the torus stored as truncated Fourier coefficients.
// Invariants kept by construction: Hermitian symmetry a_{-k} = conj(a_k)
// and zero spatial mean (the (0,0) coefficient has no write path).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(TorusSpec torus)
      : torus_(torus), a_(static_cast<size_t>(torus.mode_count()), Complex{0.0, 0.0}) {}

  const TorusSpec& torus() const { return torus_; }
  int trunc() const { return torus_.trunc; }

  bool in_range(ModeIndex k) const {
    const int n = torus_.trunc;
    return k.k1 >= -n && k.k1 <= n && k.k2 >= -n && k.k2 <= n;
  }

  size_t flat_index(ModeIndex k) const {
    const int n = torus_.trunc;
    return static_cast<size_t>(k.k1 + n) * torus_.edge() + static_cast<size_t>(k.k2 + n);
  }

  Complex at(ModeIndex k) const {
    if (!in_range(k)) return {0.0, 0.0};
    return a_[flat_index(k)];
  }
  Complex at(int k1, int k2) const { return at(ModeIndex{k1, k2}); }

  // Writes a_k = v together with the Hermitian mirror a_{-k} = conj(v).
  // The zero mode is structurally absent; writing it is a contract violation.
  void set_pair(ModeIndex k, Complex v);
  void add_pair(ModeIndex k, Complex v) { set_pair(k, at(k) + v); }

  const Complex* data() const { return a_.data(); }
  size_t size() const { return a_.size(); }

  // In-place linear algebra over coefficient vectors (same torus required).
  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);
  void axpy(double s, const SpectralField& other);  // this += s*other

  friend class FieldAccess;

 private:
  TorusSpec torus_{};
  std::vector<Complex> a_;
};

// Velocity recovered from vorticity; divergence-free with zero mean.
struct VelocityCoefficients {
  TorusSpec torus{};
  std::vector<Complex> u1;
  std::vector<Complex> u2;
};

double l2_norm(const SpectralField& field, NormConvention convention);

// sqrt(sum |a_k|^2 / |kappa|^2): coefficient-convention L2 norm of the
// velocity induced by the vorticity field.
double velocity_l2_norm(const SpectralField& field);

VelocityCoefficients velocity_from_vorticity(const SpectralField& field);
SpectralField vorticity_from_velocity(const VelocityCoefficients& vel);

// Coefficients multiplied by exp(i kappa(k) . d); represents z -> field(z + d).
SpectralField field_shift(const SpectralField& field, std::array<double, 2> displacement);

double evaluate_physical(const SpectralField& field, std::array<double, 2> point);

// Max of |field| sampled on an n x n uniform grid (sup-norm surrogate).
double sup_norm_grid(const SpectralField& field, int n = 64);

double coefficient_distance(const SpectralField& a, const SpectralField& b);
double max_coefficient_difference(const SpectralField& a, const SpectralField& b);

// Deterministic pseudo-random Hermitian field: each half mode gets a complex
// gaussian amplitude scaled by amplitude * exp(-decay*|kappa(k)|).
SpectralField random_field(TorusSpec torus, std::uint64_t seed, double amplitude = 1.0,
                           double decay = 0.0);

// CSV serialization: header "k1,k2,re,im", one row per Hermitian half mode
// (k1 > 0 or (k1 == 0 and k2 > 0)), 17 significant digits.
void write_field_csv(std::ostream& out, const SpectralField& field);
SpectralField read_field_csv(std::istream& in, TorusSpec torus);

}  // namespace kflow
