#include "kflow/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kflow/errors.hpp"

namespace kflow {

namespace {

constexpr double kMinStep = 1e-13;

// m-th time-Taylor coefficient of the forcing. Autonomous: the constant
// forcing at m = 0 only. Non-autonomous: (lambda/2)(i m' Omega)^m / m!
// times the phase at the expansion time.
void add_forcing_coefficient(const FlowParams& params, bool autonomous, double t0, int m,
                             SpectralField& out) {
  const int mode = params.forcing_mode;
  if (autonomous) {
    if (m == 0) out.add_pair({0, mode}, {params.lambda / 2.0, 0.0});
    return;
  }
  const double rate = mode * params.omega;
  Complex c = (params.lambda / 2.0) * std::polar(1.0, rate * t0);
  for (int j = 1; j <= m; ++j) c *= Complex{0.0, rate} / static_cast<double>(j);
  out.add_pair({0, mode}, c);
}

SpectralField residual_field(const FlowParams& params, const TaylorJet& jet,
                             bool include_mean_transport) {
  SpectralField res = jet.coeff[1];  // u_1 = rhs(state), exactly
  if (!include_mean_transport) {
    // Add back +i*Omega*k2*a_k to drop the transport term from the residual.
    const int n = params.torus.trunc;
    const SpectralField& state = jet.coeff[0];
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = 1; k2 <= n; ++k2)
        res.add_pair({k1, k2}, Complex{0.0, params.omega * k2} * state.at(k1, k2));
  }
  return res;
}

}  // namespace

TaylorJet compute_jet(const FlowParams& params, const SpectralField& u0, int order,
                      bool autonomous, double t0, JetConvolver* scratch) {
  if (order < 2) throw ConfigError("Taylor order must be at least 2");
  std::unique_ptr<JetConvolver> local;
  if (!scratch)
    local = std::make_unique<JetConvolver>(params.torus, order,
                                           JetConvolver::pick_backend(params.torus));
  JetConvolver& conv = scratch ? *scratch : *local;
  conv.reset();

  TaylorJet jet;
  jet.t0 = t0;
  jet.coeff.reserve(order + 1);
  jet.coeff.push_back(u0);
  conv.push_level(u0);
  for (int m = 0; m < order; ++m) {
    SpectralField next = conv.pair_sum(m);
    add_linear_terms(params, jet.coeff[m], autonomous, next);
    add_forcing_coefficient(params, autonomous, t0, m, next);
    next *= 1.0 / (m + 1);
    if (m + 1 < order) conv.push_level(next);
    jet.coeff.push_back(std::move(next));
  }
  return jet;
}

double select_step(const TaylorJet& jet, const IntegratorConfig& config) {
  const int p = jet.order();
  const double np = l2_norm(jet.coeff[p], NormConvention::Coefficient);
  const double np1 = l2_norm(jet.coeff[p - 1], NormConvention::Coefficient);
  if (np == 0.0 && np1 == 0.0) return config.h_max;  // polynomial-in-time solution
  double h = config.h_max;
  if (np1 > 0.0) h = std::min(h, std::pow(config.tol / np1, 1.0 / (p - 1)));
  if (np > 0.0) h = std::min(h, std::pow(config.tol / np, 1.0 / p));
  return config.safety * h;
}

SpectralField evaluate_jet(const TaylorJet& jet, double h) {
  SpectralField acc = jet.coeff.back();
  for (int m = jet.order() - 1; m >= 0; --m) {
    acc *= h;
    acc += jet.coeff[m];
  }
  return acc;
}

std::pair<SpectralField, double> step(const FlowParams& params, const SpectralField& state,
                                      double t, const IntegratorConfig& config, bool autonomous) {
  const TaylorJet jet = compute_jet(params, state, config.order, autonomous, t);
  const double h = select_step(jet, config);
  if (h < kMinStep)
    throw DivergenceError("Taylor step size underflow", t,
                          l2_norm(state, NormConvention::Coefficient));
  return {evaluate_jet(jet, h), h};
}

Trajectory integrate(const FlowParams& params, const SpectralField& u0, double t_final,
                     const IntegratorConfig& config, const IntegrateOptions& options) {
  params.validate();
  if (t_final <= options.t_start) throw ConfigError("integrate: t_final must exceed t_start");

  JetConvolver conv(params.torus, config.order, JetConvolver::pick_backend(params.torus));
  Trajectory traj;
  SpectralField state = u0;
  double t = options.t_start;

  std::vector<double> snaps = options.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  size_t next_snap = 0;
  auto take_snapshots_at_start = [&]() {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-14 * std::max(1.0, t)) {
      traj.snapshots.emplace_back(snaps[next_snap], state);
      ++next_snap;
    }
  };
  take_snapshots_at_start();

  traj.samples.push_back({t, l2_norm(state, NormConvention::Coefficient)});
  double next_sample = t + options.sample_every;

  while (t < t_final - 1e-14 * std::max(1.0, t_final)) {
    const TaylorJet jet = compute_jet(params, state, config.order, options.autonomous, t, &conv);
    const double h_formula = select_step(jet, config);
    if (h_formula < kMinStep)
      throw DivergenceError("Taylor step size underflow", t,
                            l2_norm(state, NormConvention::Coefficient));
    const double h = std::min(h_formula, t_final - t);
    const double slack = 1e-12 * std::max(1.0, std::abs(t) + h);

    if (options.sample_every > 0.0) {
      while (next_sample <= t + h + slack && next_sample <= t_final + slack) {
        const SpectralField s = evaluate_jet(jet, next_sample - t);
        traj.samples.push_back({next_sample, l2_norm(s, NormConvention::Coefficient)});
        next_sample += options.sample_every;
      }
    }
    while (next_snap < snaps.size() && snaps[next_snap] <= t + h + slack) {
      const double ts = snaps[next_snap];
      traj.snapshots.emplace_back(ts, evaluate_jet(jet, ts - t));
      ++next_snap;
    }

    state = evaluate_jet(jet, h);
    t += h;
    ++traj.steps;
    if (options.sample_every == 0.0)
      traj.samples.push_back({t, l2_norm(state, NormConvention::Coefficient)});
  }

  if (traj.samples.back().t < t_final - 1e-12 * std::max(1.0, t_final))
    traj.samples.push_back({t_final, l2_norm(state, NormConvention::Coefficient)});
  traj.final_state = std::move(state);
  traj.final_time = t;
  return traj;
}

StationaryStop integrate_until_stationary(const FlowParams& params, const SpectralField& u0,
                                          double residual_tol, double t_max,
                                          const IntegratorConfig& config,
                                          bool include_mean_transport) {
  params.validate();
  if (residual_tol <= 0.0) throw ConfigError("residual tolerance must be positive");

  JetConvolver conv(params.torus, config.order, JetConvolver::pick_backend(params.torus));
  SpectralField state = u0;
  double t = 0.0;
  for (;;) {
    const TaylorJet jet = compute_jet(params, state, config.order, true, t, &conv);
    const double res = l2_norm(residual_field(params, jet, include_mean_transport),
                               NormConvention::Coefficient);
    if (res <= residual_tol) return {t, std::move(state), true, res};
    if (t >= t_max) return {t, std::move(state), false, res};

    const double h_formula = select_step(jet, config);
    if (h_formula < kMinStep)
      throw DivergenceError("Taylor step size underflow", t,
                            l2_norm(state, NormConvention::Coefficient));
    const double h = std::min(h_formula, t_max - t);
    state = evaluate_jet(jet, h);
    t += h;
  }
}

}  // namespace kflow
