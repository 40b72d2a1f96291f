#include "kflow/toy_model.hpp"

#include <cmath>

#include "kflow/errors.hpp"

namespace kflow {

namespace {

// Applies op(k, f_k) over the Hermitian half of the profile.
template <typename Op>
SpectralField map_profile(const ToyParams& params, Op&& op) {
  const SpectralField& f = params.profile;
  const int n = f.trunc();
  SpectralField out(f.torus());
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      out.set_pair({k1, k2}, op(ModeIndex{k1, k2}, f.at(k1, k2)));
    }
  return out;
}

}  // namespace

void ToyParams::validate() const {
  if (alpha <= 0.0) throw ConfigError("toy model: alpha must be positive");
  if (omega_rate <= 0.0) throw ConfigError("toy model: Omega must be positive");
  if (kind == ToyForcingCase::TravelingWave) {
    const int n = profile.trunc();
    for (int k2 = 1; k2 <= n; ++k2)
      if (std::abs(profile.at(0, k2)) != 0.0)
        throw ConfigError("traveling-wave forcing requires f_k = 0 for k = (0,k2)");
  }
}

SpectralField toy_forcing(const ToyParams& params, double t) {
  const double s = params.omega_rate * t;
  if (params.kind == ToyForcingCase::StandingOscillation) {
    return map_profile(params, [&](ModeIndex, Complex fk) { return fk * std::sin(s); });
  }
  return map_profile(params,
                     [&](ModeIndex k, Complex fk) { return fk * std::polar(1.0, k.k1 * s); });
}

SpectralField primitive_g(const ToyParams& params, double t) {
  params.validate();
  const double om = params.omega_rate;
  const double s = om * t;
  if (params.kind == ToyForcingCase::StandingOscillation) {
    return map_profile(params,
                       [&](ModeIndex, Complex fk) { return -fk * std::cos(s) / om; });
  }
  return map_profile(params, [&](ModeIndex k, Complex fk) -> Complex {
    if (k.k1 == 0) return {0.0, 0.0};
    return fk / (Complex{0.0, 1.0} * static_cast<double>(k.k1) * om) * std::polar(1.0, k.k1 * s);
  });
}

SpectralField periodic_solution(const ToyParams& params, double t) {
  params.validate();
  const double al = params.alpha;
  const double om = params.omega_rate;
  const double s = om * t;
  if (params.kind == ToyForcingCase::StandingOscillation) {
    const double factor = (al * std::sin(s) - om * std::cos(s)) / (al * al + om * om);
    return map_profile(params, [&](ModeIndex, Complex fk) { return fk * factor; });
  }
  return map_profile(params, [&](ModeIndex k, Complex fk) {
    return fk * std::polar(1.0, k.k1 * s) / Complex{al, k.k1 * om};
  });
}

SpectralField exact_solution(const ToyParams& params, const SpectralField& w0, double t) {
  params.validate();
  if (t < 0.0) throw ConfigError("exact_solution: t must be non-negative");
  const double decay = std::exp(-params.alpha * t);
  // w(t) = e^{-alpha t} (w0 - w_per(0)) + w_per(t), mode-wise.
  SpectralField out = w0;
  out -= periodic_solution(params, 0.0);
  out *= decay;
  out += periodic_solution(params, t);
  return out;
}

Prop1Report verify_proposition1(const ToyParams& params, const SpectralField& w0, double horizon,
                                int samples) {
  params.validate();
  if (horizon <= 0.0) throw ConfigError("verify_proposition1: horizon must be positive");
  if (samples < 2) throw ConfigError("verify_proposition1: need at least 2 samples");

  const double f_sup = sup_norm_grid(params.profile);
  const double w0_sup = sup_norm_grid(w0);
  const SpectralField per0 = periodic_solution(params, 0.0);
  SpectralField dev0 = w0;
  dev0 -= per0;
  const double dev0_sup = sup_norm_grid(dev0);

  Prop1Report report;
  report.smallest_c1 = 0.0;
  double violation = 0.0;
  const int n = w0.trunc();
  for (int i = 0; i < samples; ++i) {
    const double t = horizon * i / (samples - 1);
    const double decay = std::exp(-params.alpha * t);
    const SpectralField w = exact_solution(params, w0, t);
    const SpectralField per = periodic_solution(params, t);
    SpectralField diff = w;
    diff -= per;

    Prop1Row row;
    row.t = t;
    row.norm_w = sup_norm_grid(w);
    row.norm_diff = sup_norm_grid(diff);
    row.bound1 = decay * w0_sup + f_sup / params.omega_rate;
    row.bound2 = decay * dev0_sup;
    report.rows.push_back(row);
    if (row.bound1 > 0.0) report.smallest_c1 = std::max(report.smallest_c1, row.norm_w / row.bound1);

    // |w_k(t) - w_per_k(t)| = e^{-alpha t} |w0_k - w_per_k(0)| with constant 1.
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = 0; k2 <= n; ++k2) {
        if (k2 == 0 && k1 <= 0) continue;
        const double lhs = std::abs(diff.at(k1, k2));
        const double rhs = decay * std::abs(dev0.at(k1, k2));
        violation = std::max(violation, std::abs(lhs - rhs));
      }
  }
  report.max_modewise_violation = violation;
  report.diff_bound_ok = violation <= 1e-12 * std::max(1.0, dev0_sup);
  return report;
}

}  // namespace kflow
