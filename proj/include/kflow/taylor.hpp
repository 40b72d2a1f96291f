#pragma once

#include <utility>
#include <vector>

#include "kflow/dynamics.hpp"

namespace kflow {

struct IntegratorConfig {
  int order = 15;                      // Taylor order p
  double tol = 2.220446049250313e-16;  // local-error tolerance (machine eps)
  double safety = 0.9;
  double h_max = 1.0;
  double t_max = 1.0e4;
};

// Taylor coefficients u_m = (1/m!) d^m omega/dt^m at one expansion time.
struct TaylorJet {
  double t0 = 0.0;
  std::vector<SpectralField> coeff;  // size order+1

  int order() const { return static_cast<int>(coeff.size()) - 1; }
};

struct TrajectorySample {
  double t = 0.0;
  double norm = 0.0;  // Coefficient convention; Integral differs by sqrt(area)
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<std::pair<double, SpectralField>> snapshots;
  SpectralField final_state;
  double final_time = 0.0;
  long steps = 0;
};

struct IntegrateOptions {
  double sample_every = 0.0;           // 0: sample at every accepted step
  std::vector<double> snapshot_times;  // exact-time field snapshots
  bool autonomous = true;
  double t_start = 0.0;
};

TaylorJet compute_jet(const FlowParams& params, const SpectralField& u0, int order,
                      bool autonomous, double t0, JetConvolver* scratch = nullptr);

// h = safety * min((tol/|u_{p-1}|)^{1/(p-1)}, (tol/|u_p|)^{1/p}, h_max);
// all-zero trailing coefficients yield h_max (polynomial-in-time solution).
double select_step(const TaylorJet& jet, const IntegratorConfig& config);

// Horner evaluation of sum u_m h^m (highest coefficient first).
SpectralField evaluate_jet(const TaylorJet& jet, double h);

std::pair<SpectralField, double> step(const FlowParams& params, const SpectralField& state,
                                      double t, const IntegratorConfig& config,
                                      bool autonomous = true);

Trajectory integrate(const FlowParams& params, const SpectralField& u0, double t_final,
                     const IntegratorConfig& config, const IntegrateOptions& options = {});

struct StationaryStop {
  double time = 0.0;
  SpectralField state;
  bool converged = false;
  double residual = 0.0;
};

// Integrates the autonomous system until the stationary residual of the full
// equation drops below residual_tol (Coefficient norm). With
// include_mean_transport = false the residual omits the beta*Omega*d_y term,
// matching the shorthand form of the stopping criterion.
StationaryStop integrate_until_stationary(const FlowParams& params, const SpectralField& u0,
                                          double residual_tol, double t_max,
                                          const IntegratorConfig& config,
                                          bool include_mean_transport = true);

}  // namespace kflow
