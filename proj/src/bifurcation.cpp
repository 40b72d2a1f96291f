#include "kflow/bifurcation.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "kflow/errors.hpp"

namespace kflow {

double shear_rightmost_real(FlowParams params, double lambda) {
  params.lambda = lambda;
  return rightmost_eigenvalue(params, shear_branch(params)).rightmost.real();
}

BifurcationResult critical_lambda(FlowParams params, double lambda_lo, double lambda_hi,
                                  double tol_rel, NormConvention convention) {
  params.validate();
  if (!(0.0 < lambda_lo && lambda_lo < lambda_hi))
    throw ConfigError("critical_lambda: need 0 < lambda_lo < lambda_hi");

  double lo = lambda_lo, hi = lambda_hi;
  double f_lo = shear_rightmost_real(params, lo);
  double f_hi = shear_rightmost_real(params, hi);
  if (!(f_lo < 0.0 && f_hi > 0.0))
    throw BracketError("critical_lambda: bracket does not straddle the crossing (Re rightmost " +
                           std::to_string(f_lo) + " at lambda=" + std::to_string(lo) + ", " +
                           std::to_string(f_hi) + " at lambda=" + std::to_string(hi) + ")",
                       f_lo, f_hi);

  while ((hi - lo) / hi > tol_rel) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = shear_rightmost_real(params, mid);
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  BifurcationResult result;
  result.omega = params.omega;
  result.lambda0 = 0.5 * (lo + hi);
  result.trunc = params.torus.trunc;
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  result.re_lo = f_lo;
  result.re_hi = f_hi;
  params.lambda = result.lambda0;
  result.norm_at_crit = l2_norm(shear_branch(params), convention);
  return result;
}

namespace {

// Expand an initial guess interval until the eigenvalue sign flips across it.
std::pair<double, double> auto_bracket(const FlowParams& params, double lo, double hi) {
  double f_lo = shear_rightmost_real(params, lo);
  int guard = 0;
  while (f_lo >= 0.0) {
    lo *= 0.5;
    f_lo = shear_rightmost_real(params, lo);
    if (++guard > 60) throw BracketError("auto_bracket: no stable lambda found", f_lo, f_lo);
  }
  double f_hi = shear_rightmost_real(params, hi);
  guard = 0;
  while (f_hi <= 0.0) {
    hi *= 2.0;
    f_hi = shear_rightmost_real(params, hi);
    if (++guard > 60) throw BracketError("auto_bracket: no unstable lambda found", f_lo, f_hi);
  }
  return {lo, hi};
}

}  // namespace

std::vector<BifurcationResult> sweep_omega(FlowParams params, const std::vector<double>& omegas,
                                           double tol_rel, NormConvention convention) {
  if (omegas.empty()) throw ConfigError("sweep_omega: empty Omega grid");
  for (size_t i = 1; i < omegas.size(); ++i)
    if (omegas[i] <= omegas[i - 1]) throw ConfigError("sweep_omega: grid must be increasing");

  std::vector<BifurcationResult> results;
  results.reserve(omegas.size());
  double guess_lo = 0.5, guess_hi = 64.0;
  for (double om : omegas) {
    params.omega = om;
    try {
      const auto [lo, hi] = auto_bracket(params, guess_lo, guess_hi);
      results.push_back(critical_lambda(params, lo, hi, tol_rel, convention));
    } catch (const BracketError& err) {
      throw BracketError("sweep_omega at Omega=" + std::to_string(om) + ": " + err.what(),
                         err.re_lo, err.re_hi);
    }
    // Warm start: lambda0 grows with Omega, so the previous point brackets
    // the next one from below.
    guess_lo = 0.5 * results.back().lambda0;
    guess_hi = 2.0 * results.back().lambda0 + 8.0;
  }
  return results;
}

FitResult quadratic_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw FitError("quadratic_fit: need at least 3 points");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double om = points[i].first;
    design(i, 0) = om * om;
    design(i, 1) = om;
    design(i, 2) = 1.0;
    y[i] = points[i].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw FitError("quadratic_fit: rank-deficient design (degenerate grid)");
  const Eigen::VectorXd c = qr.solve(y);
  const double rms = std::sqrt((design * c - y).squaredNorm() / static_cast<double>(n));
  return {c[0], c[1], c[2], rms};
}

double truncation_gap(FlowParams params, double omega, int n_small, int n_large, double tol_rel) {
  if (n_small == n_large) return 0.0;  // identical mode sets
  params.omega = omega;
  auto lambda0_at = [&](int trunc) {
    FlowParams p = params;
    p.torus.trunc = trunc;
    const auto [lo, hi] = auto_bracket(p, 0.5, 64.0);
    return critical_lambda(p, lo, hi, tol_rel).lambda0;
  };
  const double l_small = lambda0_at(n_small);
  const double l_large = lambda0_at(n_large);
  return std::abs((l_small - l_large) / l_small);
}

std::optional<double> reynolds(const FlowParams& params) {
  if (params.epsilon == 0.0) return std::nullopt;  // damped Euler regime
  const double beta = params.torus.beta;
  return params.lambda / (params.epsilon * params.epsilon * beta * beta * beta);
}

}  // namespace kflow
