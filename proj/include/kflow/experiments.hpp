#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kflow/bifurcation.hpp"
#include "kflow/fitting.hpp"
#include "kflow/taylor.hpp"
#include "kflow/toy_model.hpp"

namespace kflow {

// Resolved configuration of one experiment run. Defaults reproduce the
// published parameter choices; a JSON config file and CLI flags override.
struct ExperimentConfig {
  std::string experiment = "stabilize";
  FlowParams flow;
  IntegratorConfig integrator;

  std::string initial_condition = "IV";  // I..IV, "random", or "custom"
  std::vector<std::array<double, 4>> custom_modes;  // rows (k1,k2,re,im)
  NormConvention norm_convention = NormConvention::Coefficient;
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  double ic_noise = 1e-12;  // amplitude of the deterministic seed perturbation

  std::vector<double> omega_values;  // per-experiment grid (see defaults)
  double t_final = 5.0;
  double sample_every = 0.01;
  double residual_tol = 1e-5;
  bool include_mean_transport = true;
  double stationary_t_max = 500.0;
  double bisect_tol_rel = 1e-4;
  int n_small = 3;
  int n_large = 5;

  double toy_alpha = 1.0;
  double toy_horizon = 10.0;
  int toy_samples = 201;

  double decay_fit_start = 1.0;
  double snapshot_every = 0.02;
};

ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig load_config_file(const std::string& path, const std::string& experiment);
std::string config_to_json(const ExperimentConfig& config);

SpectralField preset_initial_condition(const ExperimentConfig& config, const std::string& name,
                                       int decorrelate = 0);

// ---- experiment outcomes -------------------------------------------------

struct StabilizeRun {
  std::string preset;
  double omega = 0.0;
  Trajectory trajectory;
};

struct StabilizeResult {
  std::vector<StabilizeRun> runs;
  std::string calibrated_convention;  // convention minimizing the IC II error
  double calibration_scale = 1.0;
  double calibration_rel_error = 0.0;
  bool calibration_ok = false;  // IC II within 2% under the best convention
  bool degraded_path = false;   // convention-free assertions used instead
  bool passed = false;
  std::string message;
};

struct BifurcateResult {
  std::vector<BifurcationResult> sweep;
  FitResult fit;
  bool passed = false;
  std::string message;
};

struct GapResult {
  std::vector<std::pair<double, double>> gaps;  // (omega, E)
  double max_gap = 0.0;
  bool passed = false;
  std::string message;
};

struct ConvergenceTimeResult {
  struct Row {
    double omega = 0.0;
    double time = 0.0;
    bool converged = false;
    double final_residual = 0.0;
  };
  std::vector<Row> rows;
  LineFit fit;  // T against log10(Omega)
  bool passed = false;
  std::string message;
};

struct GalileanResult {
  double max_discrepancy = 0.0;
  bool passed = false;
  std::string message;
};

struct DecayRateResult {
  std::vector<std::pair<double, double>> series;  // (t, |dv|)
  double fitted_rate = 0.0;
  double theory_floor = 0.0;
  bool passed = false;
  std::string message;
};

struct ToyResult {
  struct Row {
    double omega = 0.0;
    double smallest_c1 = 0.0;
    bool diff_bound_ok = false;
    double tail_amplitude = 0.0;
  };
  std::vector<Row> rows;
  double max_c1 = 0.0;
  double worst_halving_error = 0.0;
  bool passed = false;
  std::string message;
};

StabilizeResult run_stabilize(const ExperimentConfig& config);
BifurcateResult run_bifurcate(const ExperimentConfig& config);
GapResult run_gap(const ExperimentConfig& config);
ConvergenceTimeResult run_convergence_time(const ExperimentConfig& config);
GalileanResult run_galilean(const ExperimentConfig& config);
DecayRateResult run_decay_rate(const ExperimentConfig& config);
ToyResult run_toy(const ExperimentConfig& config);

// Runs the experiment named in the config; returns the process exit code
// (0 pass, 1 acceptance failure, 2 configuration error).
int run_experiment(const ExperimentConfig& config);

}  // namespace kflow
