#include <cmath>
#include <complex>

#include "doctest.h"
#include "kflow/errors.hpp"
#include "kflow/newton.hpp"
#include "kflow/taylor.hpp"

using namespace kflow;

namespace {

FlowParams make_params(double eps, double alpha, double lambda, double omega, double beta,
                       int trunc, int mode) {
  return {eps, alpha, lambda, omega, {beta, trunc}, mode};
}

// Classical RK4 on the Galerkin system, used as an independent time-stepping
// oracle for jet derivatives.
SpectralField rk4_flow(const FlowParams& p, SpectralField w, double t_final, int steps) {
  const double h = t_final / steps;
  for (int s = 0; s < steps; ++s) {
    const SpectralField k1 = rhs(p, w);
    SpectralField w2 = w;
    w2.axpy(h / 2, k1);
    const SpectralField k2 = rhs(p, w2);
    SpectralField w3 = w;
    w3.axpy(h / 2, k2);
    const SpectralField k3 = rhs(p, w3);
    SpectralField w4 = w;
    w4.axpy(h, k3);
    const SpectralField k4 = rhs(p, w4);
    w.axpy(h / 6, k1);
    w.axpy(h / 3, k2);
    w.axpy(h / 3, k3);
    w.axpy(h / 6, k4);
  }
  return w;
}

TaylorJet synthetic_jet(const TorusSpec& torus, double trailing1, double trailing2) {
  TaylorJet jet;
  for (int m = 0; m <= 15; ++m) jet.coeff.push_back(SpectralField(torus));
  SpectralField a(torus), b(torus);
  a.set_pair({1, 0}, {trailing1 / std::sqrt(2.0), 0.0});
  b.set_pair({1, 0}, {trailing2 / std::sqrt(2.0), 0.0});
  jet.coeff[14] = a;
  jet.coeff[15] = b;
  return jet;
}

}  // namespace

TEST_CASE("jet of a pure shear mode is the scalar exponential series") {
  const FlowParams p = make_params(1, 0.3, 0, 4, 0.7, 4, 1);
  SpectralField w(p.torus);
  w.set_pair({0, 2}, {0.8, -0.3});
  const TaylorJet jet = compute_jet(p, w, 8, true, 0.0);
  const Complex L = linear_symbol(p, {0, 2});
  Complex expected{0.8, -0.3};
  double factorial = 1.0;
  for (int m = 1; m <= 8; ++m) {
    expected *= L;
    factorial *= m;
    const Complex got = jet.coeff[m].at(0, 2);
    CHECK(std::abs(got - expected / factorial) <= 1e-13 * std::abs(expected / factorial));
  }
}

TEST_CASE("jet from rest is the forcing cascade") {
  const FlowParams p = make_params(1, 0, 2, 0, 0.75, 5, 2);
  const TaylorJet jet = compute_jet(p, SpectralField(p.torus), 5, true, 0.0);
  CHECK(max_coefficient_difference(jet.coeff[1], forcing_field(p)) == 0.0);
  const Complex L = linear_symbol(p, {0, 2});
  CHECK(std::abs(jet.coeff[2].at(0, 2) - L * 1.0 / 2.0) <= 1e-14 * std::abs(L));
}

TEST_CASE("jet matches Richardson-extrapolated flow derivatives") {
  const FlowParams p = make_params(1, 0, 1, 0.5, 0.7, 3, 1);
  const SpectralField w0 = random_field(p.torus, 99, 0.6, 0.2);
  const TaylorJet jet = compute_jet(p, w0, 6, true, 0.0);

  // Derivatives of the flow by central differences over +-h and +-2h with
  // one Richardson sweep; RK4 with tiny steps stands in for the exact flow.
  const double h = 5e-3;
  auto flow_at = [&](double t) {
    if (t >= 0) return rk4_flow(p, w0, t, 400);
    FlowParams pr = p;  // integrate backwards via time reversal of the ODE
    return rk4_flow(pr, w0, t, 400);
  };
  // backward states via negative step RK4
  const SpectralField fp1 = rk4_flow(p, w0, h, 400);
  const SpectralField fp2 = rk4_flow(p, w0, 2 * h, 800);
  SpectralField fm1 = w0, fm2 = w0;
  {
    // reverse-time RK4: integrate d/ds w = -rhs(w)
    auto rk4_back = [&](SpectralField w, double t_final, int steps) {
      const double hh = t_final / steps;
      for (int s = 0; s < steps; ++s) {
        const SpectralField k1 = rhs(p, w);
        SpectralField w2 = w;
        w2.axpy(-hh / 2, k1);
        const SpectralField k2 = rhs(p, w2);
        SpectralField w3 = w;
        w3.axpy(-hh / 2, k2);
        const SpectralField k3 = rhs(p, w3);
        SpectralField w4 = w;
        w4.axpy(-hh, k3);
        const SpectralField k4 = rhs(p, w4);
        w.axpy(-hh / 6, k1);
        w.axpy(-hh / 3, k2);
        w.axpy(-hh / 3, k3);
        w.axpy(-hh / 6, k4);
      }
      return w;
    };
    fm1 = rk4_back(w0, h, 400);
    fm2 = rk4_back(w0, 2 * h, 800);
  }
  (void)flow_at;

  // First derivative: central differences at h and 2h, Richardson O(h^4).
  auto combine = [&](double c_p2, double c_p1, double c_0, double c_m1, double c_m2) {
    SpectralField acc(p.torus);
    acc.axpy(c_p2, fp2);
    acc.axpy(c_p1, fp1);
    acc.axpy(c_0, w0);
    acc.axpy(c_m1, fm1);
    acc.axpy(c_m2, fm2);
    return acc;
  };
  const SpectralField d1 =
      combine(-1.0 / (12 * h), 8.0 / (12 * h), 0.0, -8.0 / (12 * h), 1.0 / (12 * h));
  const double scale1 = l2_norm(jet.coeff[1], NormConvention::Coefficient);
  CHECK(coefficient_distance(d1, jet.coeff[1]) <= 1e-6 * scale1);

  // Second derivative / 2! = u_2.
  const SpectralField d2 = combine(-1.0 / (24 * h * h), 16.0 / (24 * h * h), -30.0 / (24 * h * h),
                                   16.0 / (24 * h * h), -1.0 / (24 * h * h));
  const double scale2 = l2_norm(jet.coeff[2], NormConvention::Coefficient);
  CHECK(coefficient_distance(d2, jet.coeff[2]) <= 1e-6 * scale2);
}

TEST_CASE("step size selection formula") {
  TorusSpec torus{1.0, 2};
  IntegratorConfig config;
  config.tol = 1e-16;
  config.safety = 0.9;
  config.h_max = 1e9;
  SUBCASE("frozen arithmetic of the stated formula") {
    const TaylorJet jet = synthetic_jet(torus, 1.0, 1.0);
    const double expected = 0.9 * std::pow(1e-16, 1.0 / 14.0);
    CHECK(select_step(jet, config) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(select_step(jet, config) == doctest::Approx(0.0648).epsilon(1e-2));
  }
  SUBCASE("all-zero trailing coefficients yield h_max") {
    const TaylorJet jet = synthetic_jet(torus, 0.0, 0.0);
    config.h_max = 0.37;
    CHECK(select_step(jet, config) == 0.37);
  }
  SUBCASE("doubling the top coefficient shrinks h by 2^(-1/p)") {
    const TaylorJet jet1 = synthetic_jet(torus, 0.0, 1.0);
    const TaylorJet jet2 = synthetic_jet(torus, 0.0, 2.0);
    const double ratio = select_step(jet2, config) / select_step(jet1, config);
    CHECK(ratio == doctest::Approx(std::pow(2.0, -1.0 / 15.0)).epsilon(1e-12));
  }
}

TEST_CASE("one step reproduces the linear-mode exponential") {
  const FlowParams p = make_params(1, 0, 0, 30, 0.7, 5, 1);
  SpectralField w(p.torus);
  w.set_pair({0, 3}, {1.1, 0.7});
  IntegratorConfig config;
  const auto [next, h] = step(p, w, 0.0, config);
  const Complex expected = Complex{1.1, 0.7} * std::exp(linear_symbol(p, {0, 3}) * h);
  CHECK(std::abs(next.at(0, 3) - expected) <= 10 * config.tol * std::abs(expected));

  // The accepted step obeys the truncation bound |u_p| h^p <= tol.
  const TaylorJet jet = compute_jet(p, w, config.order, true, 0.0);
  const double hp = select_step(jet, config);
  CHECK(l2_norm(jet.coeff[config.order], NormConvention::Coefficient) *
            std::pow(hp, config.order) <=
        config.tol);
}

TEST_CASE("step leaves the zero state and the shear state fixed") {
  const FlowParams p0 = make_params(1, 0, 0, 0, 0.75, 3, 1);
  IntegratorConfig config;
  const auto [z, hz] = step(p0, SpectralField(p0.torus), 0.0, config);
  CHECK(l2_norm(z, NormConvention::Coefficient) == 0.0);
  CHECK(hz == config.h_max);

  const FlowParams p = make_params(1, 0.1, 2, 5, 0.75, 5, 2);
  const SpectralField shear = shear_branch(p);
  const auto [next, h] = step(p, shear, 0.0, config);
  CHECK(coefficient_distance(next, shear) <= 1e-13 * l2_norm(shear, NormConvention::Coefficient));
  (void)h;
}

TEST_CASE("integrate: heat decay of one mode") {
  const FlowParams p = make_params(1, 0, 0, 0, 1.0, 3, 1);
  SpectralField w(p.torus);
  w.set_pair({1, 0}, {1.0, 0.0});  // 2 cos x
  IntegratorConfig config;
  const Trajectory traj = integrate(p, w, 1.0, config, {});
  const double expected = std::exp(-1.0) * l2_norm(w, NormConvention::Coefficient);
  CHECK(l2_norm(traj.final_state, NormConvention::Coefficient) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(traj.final_time == doctest::Approx(1.0));
  CHECK(traj.samples.front().t == 0.0);
  for (size_t i = 1; i < traj.samples.size(); ++i)
    CHECK(traj.samples[i].t > traj.samples[i - 1].t);
}

TEST_CASE("integrate: sampling cadence and snapshots at exact times") {
  const FlowParams p = make_params(1, 0, 1, 2, 0.7, 3, 1);
  const SpectralField w = random_field(p.torus, 3, 0.5, 0.3);
  IntegratorConfig config;
  IntegrateOptions opts;
  opts.sample_every = 0.25;
  opts.snapshot_times = {0.0, 0.4, 1.0};
  const Trajectory traj = integrate(p, w, 1.0, config, opts);
  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.snapshots[1].first == doctest::Approx(0.4));
  CHECK(coefficient_distance(traj.snapshots[2].second, traj.final_state) <= 1e-12);
  REQUIRE(traj.samples.size() == 5);
  CHECK(traj.samples[2].t == doctest::Approx(0.5));
}

TEST_CASE("step-size robustness: halved h_max leaves the endpoint unchanged") {
  const FlowParams p = make_params(1, 0, 1, 0, 0.7, 3, 1);
  const SpectralField w = random_field(p.torus, 8, 1.0, 0.2);
  IntegratorConfig c1, c2;
  c1.h_max = 0.5;
  c2.h_max = 0.25;
  const Trajectory t1 = integrate(p, w, 2.0, c1, {});
  const Trajectory t2 = integrate(p, w, 2.0, c2, {});
  CHECK(coefficient_distance(t1.final_state, t2.final_state) <= 1e-10);
}

TEST_CASE("trajectory conjugacy between the two formulations") {
  const FlowParams p = make_params(1, 0, 1, 10, 0.7, 4, 1);
  const SpectralField w0 = random_field(p.torus, 12, 0.8, 0.3);
  IntegratorConfig config;
  const double t_final = 0.5;
  IntegrateOptions aut, osc;
  aut.sample_every = t_final;
  osc = aut;
  osc.autonomous = false;
  const Trajectory transformed = integrate(p, w0, t_final, config, aut);
  const Trajectory oscillating = integrate(p, w0, t_final, config, osc);
  const SpectralField mapped =
      field_shift(transformed.final_state, {0.0, -p.torus.beta * p.omega * t_final});
  CHECK(max_coefficient_difference(oscillating.final_state, mapped) <= 1e-8);
}

TEST_CASE("integrate_until_stationary") {
  SUBCASE("already-stationary start returns immediately") {
    const FlowParams p = make_params(1, 0, 0.5, 0, 0.75, 4, 1);
    const SpectralField shear = shear_branch(p);
    IntegratorConfig config;
    const StationaryStop stop = integrate_until_stationary(p, shear, 1e-5, 50.0, config);
    CHECK(stop.converged);
    CHECK(stop.time == 0.0);
    CHECK(stop.residual <= 1e-5);
  }
  SUBCASE("loose tolerance stops at t=0") {
    const FlowParams p = make_params(1, 0, 1, 0, 0.7, 3, 1);
    IntegratorConfig config;
    const StationaryStop stop =
        integrate_until_stationary(p, SpectralField(p.torus), 10.0, 50.0, config);
    CHECK(stop.converged);
    CHECK(stop.time == 0.0);
  }
  SUBCASE("monotone in tolerance and converges from a kicked state") {
    const FlowParams p = make_params(1, 0, 1, 20, 0.7, 3, 1);
    SpectralField ic(p.torus);
    ic.set_pair({1, 0}, {10.0, -10.0});
    IntegratorConfig config;
    const StationaryStop a = integrate_until_stationary(p, ic, 1e-5, 100.0, config);
    const StationaryStop b = integrate_until_stationary(p, ic, 2e-5, 100.0, config);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(b.time <= a.time);
    CHECK(a.time > 0.0);
  }
  SUBCASE("t_max exceeded reports non-convergence") {
    const FlowParams p = make_params(1, 0, 1, 0, 0.7, 3, 1);
    SpectralField ic(p.torus);
    ic.set_pair({1, 0}, {50.0, 0.0});
    IntegratorConfig config;
    const StationaryStop stop = integrate_until_stationary(p, ic, 1e-13, 0.5, config);
    CHECK_FALSE(stop.converged);
    CHECK(stop.residual > 1e-13);
  }
}
