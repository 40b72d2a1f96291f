#include "kflow/newton.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "kflow/errors.hpp"

namespace kflow {

SpectralField residual(const FlowParams& params, const SpectralField& omega) {
  return rhs(params, omega);
}

SpectralField shear_branch(const FlowParams& params) {
  params.validate();
  const int m = params.forcing_mode;
  const double beta = params.torus.beta;
  const Complex den{params.epsilon * m * m / (beta * beta) + params.alpha, params.omega * m};
  if (std::abs(den) == 0.0)
    throw ConfigError("shear branch undefined: epsilon = alpha = Omega = 0");
  SpectralField state(params.torus);
  state.set_pair({0, m}, (params.lambda / 2.0) / den);
  return state;
}

NewtonReport newton_solve(const FlowParams& params, const SpectralField& guess,
                          const NewtonOptions& options) {
  params.validate();
  NewtonReport report;
  report.solution = guess;
  SpectralField r = residual(params, report.solution);
  report.residual_norms.push_back(l2_norm(r, NormConvention::Coefficient));

  while (report.iterations < options.max_iter) {
    if (report.residual_norms.back() <= options.tol) {
      report.converged = true;
      return report;
    }
    const Eigen::MatrixXd jac = jacobian_dense(params, report.solution);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (pivot_min < 1e-14 * jac.norm())
      throw SingularJacobianError("Newton: singular Jacobian (at bifurcation point)");
    const Eigen::VectorXd delta = lu.solve(-pack_state(r));
    report.solution = unpack_state(params.torus, pack_state(report.solution) + delta);
    ++report.iterations;
    r = residual(params, report.solution);
    report.residual_norms.push_back(l2_norm(r, NormConvention::Coefficient));
  }
  report.converged = report.residual_norms.back() <= options.tol;
  return report;
}

StabilityReport rightmost_eigenvalue(const FlowParams& params, const SpectralField& base) {
  const Eigen::MatrixXd jac = jacobian_dense(params, base);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("rightmost_eigenvalue: eigensolver did not converge");
  const auto& values = solver.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i].real() > values[best].real()) best = i;
  return {values[best], std::abs(base.at(1, 0))};
}

std::vector<std::complex<double>> spectrum(const FlowParams& params, const SpectralField& base) {
  const Eigen::MatrixXd jac = jacobian_dense(params, base);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectrum: eigensolver did not converge");
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

}  // namespace kflow
