#include "kflow/dynamics.hpp"

#include <cmath>
#include <string>

#include "kflow/errors.hpp"

namespace kflow {

void FlowParams::validate() const {
  if (torus.beta <= 0.0) throw ConfigError("torus aspect ratio beta must be positive");
  if (torus.trunc < 1) throw ConfigError("truncation must be at least 1");
  if (epsilon < 0.0 || alpha < 0.0) throw ConfigError("epsilon and alpha must be non-negative");
  if (std::max(epsilon, alpha) <= 0.0)
    throw ConfigError("max(epsilon, alpha) must be positive (dissipative system)");
  if (omega < 0.0) throw ConfigError("Omega must be non-negative");
  if (forcing_mode < 1) throw ConfigError("forcing mode must be a positive integer");
  if (forcing_mode > torus.trunc)
    throw ConfigError("forcing mode " + std::to_string(forcing_mode) +
                      " exceeds truncation N=" + std::to_string(torus.trunc));
}

std::complex<double> linear_symbol(const FlowParams& params, ModeIndex k) {
  return {-params.epsilon * wavenumber_sq(params.torus, k) - params.alpha,
          -params.omega * k.k2};
}

SpectralField forcing_field(const FlowParams& params) {
  if (params.forcing_mode > params.torus.trunc)
    throw ConfigError("forcing mode exceeds truncation");
  SpectralField f(params.torus);
  f.set_pair({0, params.forcing_mode}, {params.lambda / 2.0, 0.0});
  return f;
}

SpectralField advection(const SpectralField& omega) { return bilinear_advection(omega, omega); }

void add_linear_terms(const FlowParams& params, const SpectralField& w, bool with_mean_transport,
                      SpectralField& out) {
  const int n = params.torus.trunc;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const ModeIndex k{k1, k2};
      std::complex<double> L = linear_symbol(params, k);
      if (!with_mean_transport) L += std::complex<double>{0.0, params.omega * k.k2};
      out.add_pair(k, L * w.at(k));
    }
}

SpectralField rhs(const FlowParams& params, const SpectralField& omega) {
  SpectralField out = advection(omega);
  add_linear_terms(params, omega, true, out);
  out.add_pair({0, params.forcing_mode}, {params.lambda / 2.0, 0.0});
  return out;
}

SpectralField rhs_nonautonomous(const FlowParams& params, const SpectralField& omega, double t) {
  SpectralField out = advection(omega);
  add_linear_terms(params, omega, false, out);
  const double phase = params.forcing_mode * params.omega * t;
  out.add_pair({0, params.forcing_mode}, (params.lambda / 2.0) * std::polar(1.0, phase));
  return out;
}

std::vector<ModeIndex> half_modes(const TorusSpec& torus) {
  std::vector<ModeIndex> modes;
  modes.reserve((torus.mode_count() - 1) / 2);
  const int n = torus.trunc;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2)
      if (k1 > 0 || (k1 == 0 && k2 > 0)) modes.push_back({k1, k2});
  return modes;
}

Eigen::VectorXd pack_state(const SpectralField& field) {
  const auto modes = half_modes(field.torus());
  Eigen::VectorXd x(2 * static_cast<Eigen::Index>(modes.size()));
  for (size_t i = 0; i < modes.size(); ++i) {
    const Complex a = field.at(modes[i]);
    x[2 * i] = a.real();
    x[2 * i + 1] = a.imag();
  }
  return x;
}

SpectralField unpack_state(const TorusSpec& torus, const Eigen::VectorXd& x) {
  const auto modes = half_modes(torus);
  if (x.size() != 2 * static_cast<Eigen::Index>(modes.size()))
    throw ConfigError("unpack_state: vector length does not match the truncation");
  SpectralField field(torus);
  for (size_t i = 0; i < modes.size(); ++i)
    field.set_pair(modes[i], {x[2 * i], x[2 * i + 1]});
  return field;
}

Eigen::MatrixXd jacobian_dense(const FlowParams& params, const SpectralField& base) {
  const auto modes = half_modes(params.torus);
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXd jac(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    const SpectralField delta = unpack_state(params.torus, e);
    e[j] = 0.0;
    SpectralField col = bilinear_advection(delta, base);
    col += bilinear_advection(base, delta);
    add_linear_terms(params, delta, true, col);
    jac.col(j) = pack_state(col);
  }
  return jac;
}

}  // namespace kflow
