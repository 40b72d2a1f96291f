#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "kflow/newton.hpp"

namespace kflow {

struct BifurcationResult {
  double omega = 0.0;
  double lambda0 = 0.0;
  double norm_at_crit = 0.0;  // shear-state norm at lambda0, stated convention
  int trunc = 0;
  // Certification data: the final bracket and the rightmost eigenvalue real
  // parts at its endpoints (negative below, positive above).
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double re_lo = 0.0, re_hi = 0.0;
};

struct FitResult {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;  // lambda0(Omega) ~ c2 Om^2 + c1 Om + c0
  double rms_residual = 0.0;
};

// Re of the rightmost Jacobian eigenvalue on the shear branch at this lambda.
double shear_rightmost_real(FlowParams params, double lambda);

// Bisection on the eigenvalue sign over [lambda_lo, lambda_hi]; the bracket
// must straddle the crossing (BracketError otherwise).
BifurcationResult critical_lambda(FlowParams params, double lambda_lo, double lambda_hi,
                                  double tol_rel = 1e-4,
                                  NormConvention convention = NormConvention::Coefficient);

// One BifurcationResult per Omega with warm-started, geometrically extended
// brackets. omegas must be non-empty and increasing.
std::vector<BifurcationResult> sweep_omega(FlowParams params, const std::vector<double>& omegas,
                                           double tol_rel = 1e-4,
                                           NormConvention convention = NormConvention::Coefficient);

// Ordinary least squares on the monomial basis (Om^2, Om, 1).
FitResult quadratic_fit(const std::vector<std::pair<double, double>>& points);

// E(Omega, N, M) = |(lambda0(N) - lambda0(M)) / lambda0(N)|.
double truncation_gap(FlowParams params, double omega, int n_small, int n_large,
                      double tol_rel = 1e-6);

// Re ~ lambda / (eps^2 beta^3); empty in the damped Euler regime (eps = 0).
std::optional<double> reynolds(const FlowParams& params);

}  // namespace kflow
