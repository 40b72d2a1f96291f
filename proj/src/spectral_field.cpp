#include "kflow/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "kflow/errors.hpp"

namespace kflow {

void SpectralField::set_pair(ModeIndex k, Complex v) {
  if (!in_range(k))
    throw ConfigError("mode (" + std::to_string(k.k1) + "," + std::to_string(k.k2) +
                      ") outside truncation |k|_inf <= " + std::to_string(torus_.trunc));
  if (k.k1 == 0 && k.k2 == 0) {
    if (std::abs(v) != 0.0)
      throw ConfigError("zero mode carries the spatial mean and is fixed to zero");
    return;
  }
  a_[flat_index(k)] = v;
  a_[flat_index(ModeIndex{-k.k1, -k.k2})] = std::conj(v);
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= other.a_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

void SpectralField::axpy(double s, const SpectralField& other) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += s * other.a_[i];
}

double l2_norm(const SpectralField& field, NormConvention convention) {
  double sum = 0.0;
  const Complex* a = field.data();
  for (size_t i = 0; i < field.size(); ++i) sum += std::norm(a[i]);
  const double coeff = std::sqrt(sum);
  if (convention == NormConvention::Coefficient) return coeff;
  return std::sqrt(field.torus().area()) * coeff;
}

double velocity_l2_norm(const SpectralField& field) {
  const int n = field.trunc();
  double sum = 0.0;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      sum += std::norm(field.at(k1, k2)) / wavenumber_sq(field.torus(), {k1, k2});
    }
  return std::sqrt(sum);
}

VelocityCoefficients velocity_from_vorticity(const SpectralField& field) {
  const TorusSpec& torus = field.torus();
  const int n = torus.trunc;
  if (std::abs(field.at(0, 0)) != 0.0)
    throw ConfigError("velocity recovery requires a zero-mean vorticity field");
  VelocityCoefficients vel{torus,
                           std::vector<Complex>(field.size(), Complex{0, 0}),
                           std::vector<Complex>(field.size(), Complex{0, 0})};
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const ModeIndex k{k1, k2};
      const auto [kx, ky] = wavenumber(torus, k);
      const double ksq = kx * kx + ky * ky;
      const Complex a = field.at(k);
      const size_t i = field.flat_index(k);
      // v = grad^perp(psi) with Laplacian(psi) = omega:
      // u1 = i*ky*a/|kappa|^2, u2 = -i*kx*a/|kappa|^2, so that rot v = omega.
      vel.u1[i] = Complex{0, 1} * ky * a / ksq;
      vel.u2[i] = Complex{0, -1} * kx * a / ksq;
    }
  return vel;
}

SpectralField vorticity_from_velocity(const VelocityCoefficients& vel) {
  const TorusSpec& torus = vel.torus;
  const int n = torus.trunc;
  SpectralField rot(torus);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const ModeIndex k{k1, k2};
      const auto [kx, ky] = wavenumber(torus, k);
      const size_t i = rot.flat_index(k);
      rot.set_pair(k, Complex{0, 1} * (kx * vel.u2[i] - ky * vel.u1[i]));
    }
  return rot;
}

SpectralField field_shift(const SpectralField& field, std::array<double, 2> displacement) {
  const TorusSpec& torus = field.torus();
  const int n = torus.trunc;
  SpectralField out(torus);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const ModeIndex k{k1, k2};
      const auto [kx, ky] = wavenumber(torus, k);
      const double phase = kx * displacement[0] + ky * displacement[1];
      out.set_pair(k, field.at(k) * std::polar(1.0, phase));
    }
  return out;
}

double evaluate_physical(const SpectralField& field, std::array<double, 2> point) {
  const int n = field.trunc();
  double value = 0.0;
  // Hermitian pairs: sum = 2*Re(a_k e^{i kappa.z}) over the half lattice.
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const auto [kx, ky] = wavenumber(field.torus(), {k1, k2});
      const double phase = kx * point[0] + ky * point[1];
      value += 2.0 * std::real(field.at(k1, k2) * std::polar(1.0, phase));
    }
  return value;
}

double sup_norm_grid(const SpectralField& field, int n) {
  const double lx = 2.0 * M_PI;
  const double ly = 2.0 * M_PI * field.torus().beta;
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = std::abs(evaluate_physical(field, {lx * i / n, ly * j / n}));
      best = std::max(best, v);
    }
  return best;
}

double coefficient_distance(const SpectralField& a, const SpectralField& b) {
  SpectralField d = a;
  d -= b;
  return l2_norm(d, NormConvention::Coefficient);
}

double max_coefficient_difference(const SpectralField& a, const SpectralField& b) {
  double best = 0.0;
  for (size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
  return best;
}

SpectralField random_field(TorusSpec torus, std::uint64_t seed, double amplitude, double decay) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField field(torus);
  const int n = torus.trunc;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const double w = amplitude * std::exp(-decay * std::sqrt(wavenumber_sq(torus, {k1, k2})));
      field.set_pair({k1, k2}, w * Complex{gauss(rng), gauss(rng)});
    }
  return field;
}

void write_field_csv(std::ostream& out, const SpectralField& field) {
  const int n = field.trunc();
  out << "k1,k2,re,im\n";
  char buf[96];
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (!(k1 > 0 || (k1 == 0 && k2 > 0))) continue;
      const Complex a = field.at(k1, k2);
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", k1, k2, a.real(), a.imag());
      out << buf;
    }
}

SpectralField read_field_csv(std::istream& in, TorusSpec torus) {
  SpectralField field(torus);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k1,k2", 0) != 0)
    throw ConfigError("field CSV: missing 'k1,k2,re,im' header");
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int k1 = 0, k2 = 0;
    double re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &k1, &k2, &re, &im) != 4)
      throw ConfigError("field CSV: malformed row at line " + std::to_string(lineno));
    if (!(k1 > 0 || (k1 == 0 && k2 > 0)))
      throw ConfigError("field CSV: row at line " + std::to_string(lineno) +
                        " is not in the Hermitian half (k1>0 or k1=0,k2>0)");
    field.set_pair({k1, k2}, Complex{re, im});
  }
  return field;
}

}  // namespace kflow
