#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "kflow/convolver.hpp"
#include "kflow/spectral_field.hpp"

namespace kflow {

// Parameter vector of the transformed vorticity equation
//   w_t + (v + beta*Omega*e2).grad w - epsilon*Lap w + alpha*w = lambda*cos(m*y/beta)
// on the torus [0,2pi] x [0,2pi*beta], Galerkin-truncated at |k|_inf <= trunc.
struct FlowParams {
  double epsilon = 1.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double omega = 0.0;
  TorusSpec torus{};
  int forcing_mode = 1;

  void validate() const;  // throws ConfigError
};

// L(k) = -epsilon*|kappa(k)|^2 - alpha - i*Omega*k2 (the mean-flow transport
// beta*Omega*d_y applied to exp(i k2 y/beta) gives i*Omega*k2 exactly).
std::complex<double> linear_symbol(const FlowParams& params, ModeIndex k);

// rot of the forcing: coefficients lambda/2 at (0, +-m).
SpectralField forcing_field(const FlowParams& params);

// Galerkin projection of -v(w).grad w.
SpectralField advection(const SpectralField& omega);

// d(omega)/dt of the autonomous transformed system.
SpectralField rhs(const FlowParams& params, const SpectralField& omega);

// Untransformed twin: no mean-flow transport, oscillating forcing phase
// exp(+-i m Omega t). Related to rhs by the moving-frame conjugacy.
SpectralField rhs_nonautonomous(const FlowParams& params, const SpectralField& omega, double t);

// out += L.w per mode; with_mean_transport=false drops the -i*Omega*k2 part.
void add_linear_terms(const FlowParams& params, const SpectralField& w, bool with_mean_transport,
                      SpectralField& out);

// Real-coordinate packing of the Hermitian half (k1 > 0 or k1 = 0, k2 > 0):
// interleaved (Re, Im) per mode, deterministic order.
std::vector<ModeIndex> half_modes(const TorusSpec& torus);
Eigen::VectorXd pack_state(const SpectralField& field);
SpectralField unpack_state(const TorusSpec& torus, const Eigen::VectorXd& x);

// Derivative of rhs at base over the packed real coordinates.
Eigen::MatrixXd jacobian_dense(const FlowParams& params, const SpectralField& base);

}  // namespace kflow
