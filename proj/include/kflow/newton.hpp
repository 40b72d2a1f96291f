#pragma once

#include <complex>
#include <vector>

#include "kflow/dynamics.hpp"

namespace kflow {

struct NewtonOptions {
  double tol = 1e-10;  // Coefficient-norm residual
  int max_iter = 25;
};

struct NewtonReport {
  SpectralField solution;
  std::vector<double> residual_norms;  // per evaluation, starting with the guess
  int iterations = 0;
  bool converged = false;
};

struct StabilityReport {
  std::complex<double> rightmost;
  double a10 = 0.0;  // |a_(1,0)| order parameter of the base state
};

// Stationary residual; sign convention residual = d(omega)/dt.
SpectralField residual(const FlowParams& params, const SpectralField& omega);

// Exact x-independent stationary solution:
// a_(0,m) = (lambda/2) / (eps m^2/beta^2 + alpha + i Omega m).
SpectralField shear_branch(const FlowParams& params);

// Newton iteration with dense LU; throws SingularJacobianError at a
// bifurcation point (pivot < 1e-14 * |J|).
NewtonReport newton_solve(const FlowParams& params, const SpectralField& guess,
                          const NewtonOptions& options = {});

StabilityReport rightmost_eigenvalue(const FlowParams& params, const SpectralField& base);

// Full spectrum of the dense Jacobian (intended for small truncations).
std::vector<std::complex<double>> spectrum(const FlowParams& params, const SpectralField& base);

}  // namespace kflow
