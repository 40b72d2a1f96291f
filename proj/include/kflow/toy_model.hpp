#pragma once

#include <vector>

#include "kflow/spectral_field.hpp"

namespace kflow {

// Linear friction model w_t + alpha*w = F(x, Omega*t) on the torus, solved in
// closed form per Fourier mode. Two forcing shapes:
//   TravelingWave:       F(x, s) = f(x + s*e1)   (requires f_k = 0 for k1 = 0)
//   StandingOscillation: F(x, s) = f(x) * sin(s)
enum class ToyForcingCase { TravelingWave, StandingOscillation };

struct ToyParams {
  double alpha = 1.0;
  double omega_rate = 1.0;  // Omega
  ToyForcingCase kind = ToyForcingCase::StandingOscillation;
  SpectralField profile;  // f, zero mean

  void validate() const;
};

// Forcing F(., Omega*t) at time t.
SpectralField toy_forcing(const ToyParams& params, double t);

// Time primitive g with d/dt[g(., Omega t)] = F(., Omega t) and |g| = O(1/Omega):
//   TravelingWave:       g_k = (1/Omega) f_k/(i k1) exp(i k1 Omega t)
//   StandingOscillation: g   = -(1/Omega) cos(Omega t) f
SpectralField primitive_g(const ToyParams& params, double t);

// Duhamel solution from w0, exact per mode.
SpectralField exact_solution(const ToyParams& params, const SpectralField& w0, double t);

// The unique 2pi/Omega-periodic solution.
SpectralField periodic_solution(const ToyParams& params, double t);

struct Prop1Row {
  double t = 0.0;
  double norm_w = 0.0;     // |w(t)|_inf (grid sup)
  double norm_diff = 0.0;  // |w(t) - w_per(t)|_inf
  double bound1 = 0.0;     // e^{-alpha t}|w0|_inf + |f|_inf/Omega
  double bound2 = 0.0;     // e^{-alpha t}|w0 - w_per(0)|_inf
};

struct Prop1Report {
  std::vector<Prop1Row> rows;
  double smallest_c1 = 0.0;           // max_t norm_w / bound1
  bool diff_bound_ok = false;         // mode-wise equality with constant 1
  double max_modewise_violation = 0.0;
};

Prop1Report verify_proposition1(const ToyParams& params, const SpectralField& w0, double horizon,
                                int samples);

}  // namespace kflow
