#include <cmath>
#include <complex>

#include "doctest.h"
#include "kflow/dynamics.hpp"
#include "kflow/errors.hpp"
#include "kflow/newton.hpp"

using namespace kflow;

namespace {

FlowParams params_37(double eps, double alpha, double lambda, double omega, double beta,
                     int trunc, int mode) {
  return {eps, alpha, lambda, omega, {beta, trunc}, mode};
}

// Physical-space oracle: evaluate -v.grad(omega) pointwise on a grid and
// project back onto one Fourier mode by discrete quadrature.
Complex grid_advection_mode(const SpectralField& w, ModeIndex k, int grid) {
  const auto vel = velocity_from_vorticity(w);
  const TorusSpec& torus = w.torus();
  const int n = torus.trunc;
  const double lx = 2.0 * M_PI, ly = 2.0 * M_PI * torus.beta;
  Complex acc{0.0, 0.0};
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double x = lx * i / grid, y = ly * j / grid;
      double u1 = 0, u2 = 0, g1 = 0, g2 = 0;
      for (int p1 = -n; p1 <= n; ++p1)
        for (int p2 = -n; p2 <= n; ++p2) {
          const auto [kx, ky] = wavenumber(torus, {p1, p2});
          const Complex phase = std::polar(1.0, kx * x + ky * y);
          const size_t idx = w.flat_index({p1, p2});
          u1 += (vel.u1[idx] * phase).real();
          u2 += (vel.u2[idx] * phase).real();
          g1 += (Complex{0, 1} * kx * w.at(p1, p2) * phase).real();
          g2 += (Complex{0, 1} * ky * w.at(p1, p2) * phase).real();
        }
      const auto [ox, oy] = wavenumber(torus, k);
      acc += -(u1 * g1 + u2 * g2) * std::polar(1.0, -(ox * x + oy * y));
    }
  return acc / static_cast<double>(grid * grid);
}

}  // namespace

TEST_CASE("forcing field") {
  CHECK(l2_norm(forcing_field(params_37(1, 0, 0, 0, 0.75, 5, 2)), NormConvention::Coefficient) ==
        0.0);
  const SpectralField f100 = forcing_field(params_37(1, 0, 100, 0, 0.75, 13, 2));
  CHECK(f100.at(0, 2) == Complex{50.0, 0.0});
  CHECK(f100.at(0, -2) == Complex{50.0, 0.0});
  const SpectralField f1 = forcing_field(params_37(1, 0, 1, 0, 0.7, 3, 1));
  CHECK(f1.at(0, 1) == Complex{0.5, 0.0});
  CHECK_THROWS_AS(forcing_field(params_37(1, 0, 1, 0, 0.7, 3, 4)), ConfigError);
}

TEST_CASE("flow parameter validation") {
  CHECK_THROWS_AS(params_37(0, 0, 1, 0, 0.7, 3, 1).validate(), ConfigError);
  CHECK_THROWS_AS(params_37(1, 0, 1, 0, -0.7, 3, 1).validate(), ConfigError);
  CHECK_THROWS_AS(params_37(1, 0, 1, 0, 0.7, 3, 4).validate(), ConfigError);
  CHECK_NOTHROW(params_37(0, 0.5, 1, 0, 0.7, 3, 1).validate());
}

TEST_CASE("linear symbol") {
  CHECK(linear_symbol(params_37(1, 0, 0, 0, 1.0, 3, 1), {1, 0}) == Complex{-1.0, 0.0});
  const Complex l2 = linear_symbol(params_37(1, 0, 0, 100, 0.75, 3, 1), {0, 2});
  CHECK(l2.real() == doctest::Approx(-(2.0 / 0.75) * (2.0 / 0.75)));
  CHECK(l2.imag() == doctest::Approx(-200.0));
  const Complex l3 = linear_symbol(params_37(0, 0.3, 0, 5, 0.7, 3, 1), {1, -1});
  CHECK(l3.real() == doctest::Approx(-0.3));
  CHECK(l3.imag() == doctest::Approx(5.0));
}

TEST_CASE("advection vanishes on single-mode shear and columnar states") {
  TorusSpec torus{0.75, 4};
  SpectralField shear(torus);
  shear.set_pair({0, 2}, {1.7, 0.4});
  CHECK(l2_norm(advection(shear), NormConvention::Coefficient) == doctest::Approx(0.0));
  SpectralField column(torus);
  column.set_pair({1, 0}, {2.5, -0.3});
  CHECK(l2_norm(advection(column), NormConvention::Coefficient) == doctest::Approx(0.0));
}

TEST_CASE("advection of cos(x)+cos(y/beta) against the grid oracle") {
  TorusSpec torus{1.0, 2};
  SpectralField w(torus);
  w.set_pair({1, 0}, {0.5, 0.0});
  w.set_pair({0, 1}, {0.5, 0.0});
  const SpectralField adv = advection(w);
  // Nonzero output only at (+-1, +-1).
  for (int k1 = -2; k1 <= 2; ++k1)
    for (int k2 = -2; k2 <= 2; ++k2) {
      const bool corner = std::abs(k1) == 1 && std::abs(k2) == 1;
      if (!corner) CHECK(std::abs(adv.at(k1, k2)) <= 1e-15);
    }
  for (ModeIndex k : {ModeIndex{1, 1}, ModeIndex{1, -1}}) {
    const Complex oracle = grid_advection_mode(w, k, 64);
    CHECK(adv.at(k).real() == doctest::Approx(oracle.real()).epsilon(1e-10));
    CHECK(adv.at(k).imag() == doctest::Approx(oracle.imag()).epsilon(1e-10));
  }
}

TEST_CASE("advection against the grid oracle, random field") {
  TorusSpec torus{0.7, 2};
  const SpectralField w = random_field(torus, 31, 0.8, 0.0);
  const SpectralField adv = advection(w);
  for (ModeIndex k : {ModeIndex{1, 0}, ModeIndex{2, -1}, ModeIndex{0, 2}, ModeIndex{1, 2}}) {
    const Complex oracle = grid_advection_mode(w, k, 48);
    CHECK(std::abs(adv.at(k) - oracle) <= 1e-10 * (1.0 + std::abs(oracle)));
  }
}

TEST_CASE("rhs: stationary shear, heat decay, zero state") {
  SUBCASE("closed-form shear state is stationary") {
    for (double omega : {0.0, 100.0}) {
      const FlowParams p = params_37(1, 0, 100, omega, 0.75, 13, 2);
      const SpectralField shear = shear_branch(p);
      CHECK(l2_norm(rhs(p, shear), NormConvention::Coefficient) <=
            1e-12 * l2_norm(shear, NormConvention::Coefficient));
    }
  }
  SUBCASE("lambda=0 single mode decays by the heat semigroup") {
    const FlowParams p = params_37(1, 0, 0, 0, 1.0, 3, 1);
    SpectralField w(p.torus);
    w.set_pair({1, 0}, {0.5, 0.0});
    const SpectralField f = rhs(p, w);
    CHECK(f.at(1, 0) == Complex{-0.5, 0.0});  // -cos(x)
  }
  SUBCASE("zero state gives the forcing") {
    const FlowParams p = params_37(1, 0, 1, 0, 0.7, 3, 1);
    const SpectralField f = rhs(p, SpectralField(p.torus));
    CHECK(max_coefficient_difference(f, forcing_field(p)) == 0.0);
  }
}

TEST_CASE("rhs preserves the zero mean and Hermitian symmetry") {
  const FlowParams p = params_37(1, 0.2, 3, 7, 0.7, 5, 1);
  const SpectralField w = random_field(p.torus, 77, 1.5, 0.1);
  const SpectralField f = rhs(p, w);
  CHECK(std::abs(f.at(0, 0)) == 0.0);
  for (int k1 = -5; k1 <= 5; ++k1)
    for (int k2 = -5; k2 <= 5; ++k2)
      CHECK(std::abs(f.at(k1, k2) - std::conj(f.at(-k1, -k2))) <=
            1e-15 * (1.0 + std::abs(f.at(k1, k2))));
}

TEST_CASE("enstrophy neutrality of the truncated transport") {
  for (int trunc : {3, 8, 13}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TorusSpec torus{0.75, trunc};
      SpectralField w = random_field(torus, 101 + seed, 1.0, 0.0);
      w *= 1.0 / l2_norm(w, NormConvention::Coefficient);
      const SpectralField adv = advection(w);
      long double ip = 0.0;
      for (size_t i = 0; i < w.size(); ++i)
        ip += (std::conj(w.data()[i]) * adv.data()[i]).real();
      CHECK(std::abs(static_cast<double>(ip)) <= 1e-12);
    }
  }
}

TEST_CASE("oscillating-force twin: phase and conjugacy") {
  const FlowParams p = params_37(1, 0, 2, 8, 0.7, 4, 2);
  SUBCASE("t=0 equals the transformed rhs at Omega=0") {
    FlowParams p0 = p;
    p0.omega = 0.0;
    const SpectralField w = random_field(p.torus, 5, 0.7, 0.2);
    CHECK(max_coefficient_difference(rhs_nonautonomous(p, w, 0.0), rhs(p0, w)) <= 1e-14);
  }
  SUBCASE("half period flips the forcing sign") {
    const double t_half = M_PI / (p.forcing_mode * p.omega);
    const SpectralField f = rhs_nonautonomous(p, SpectralField(p.torus), t_half);
    CHECK(f.at(0, 2).real() == doctest::Approx(-1.0));  // -lambda/2
    CHECK(f.at(0, 2).imag() == doctest::Approx(0.0));
  }
  SUBCASE("rhs conjugacy under the moving frame") {
    const SpectralField w = random_field(p.torus, 6, 0.9, 0.1);
    for (double t : {0.13, 0.77}) {
      const double d = p.torus.beta * p.omega * t;
      const SpectralField lhs = rhs_nonautonomous(p, w, t);
      const SpectralField rhs_shifted =
          field_shift(rhs(p, field_shift(w, {0.0, d})), {0.0, -d});
      CHECK(coefficient_distance(lhs, rhs_shifted) <=
            1e-12 * l2_norm(lhs, NormConvention::Coefficient));
    }
  }
}

TEST_CASE("dense Jacobian") {
  SUBCASE("at the zero state it realizes the linear symbols") {
    const FlowParams p = params_37(1, 0.1, 5, 3, 0.8, 2, 1);
    const Eigen::MatrixXd jac = jacobian_dense(p, SpectralField(p.torus));
    const auto modes = half_modes(p.torus);
    for (size_t i = 0; i < modes.size(); ++i) {
      const Complex L = linear_symbol(p, modes[i]);
      CHECK(jac(2 * i, 2 * i) == doctest::Approx(L.real()));
      CHECK(jac(2 * i + 1, 2 * i + 1) == doctest::Approx(L.real()));
      CHECK(jac(2 * i + 1, 2 * i) == doctest::Approx(L.imag()));
      CHECK(jac(2 * i, 2 * i + 1) == doctest::Approx(-L.imag()));
    }
    // Off-diagonal blocks vanish without advection.
    Eigen::MatrixXd off = jac;
    for (size_t i = 0; i < modes.size(); ++i)
      off.block<2, 2>(2 * i, 2 * i).setZero();
    CHECK(off.norm() <= 1e-14 * jac.norm());
  }
  SUBCASE("matches central differences of rhs") {
    const FlowParams p = params_37(1, 0, 4, 2, 0.7, 3, 1);
    const SpectralField base = random_field(p.torus, 13, 0.8, 0.1);
    const Eigen::MatrixXd jac = jacobian_dense(p, base);
    const SpectralField dir = random_field(p.torus, 14, 1.0, 0.0);
    const Eigen::VectorXd x = pack_state(base);
    const Eigen::VectorXd v = pack_state(dir);
    const double h = 1e-5;
    const SpectralField fp = rhs(p, unpack_state(p.torus, x + h * v));
    const SpectralField fm = rhs(p, unpack_state(p.torus, x - h * v));
    const Eigen::VectorXd fd = (pack_state(fp) - pack_state(fm)) / (2.0 * h);
    CHECK((jac * v - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("pack/unpack round trip") {
  TorusSpec torus{0.7, 4};
  const SpectralField f = random_field(torus, 55, 1.3, 0.1);
  CHECK(max_coefficient_difference(unpack_state(torus, pack_state(f)), f) == 0.0);
  CHECK(half_modes(torus).size() == static_cast<size_t>((torus.mode_count() - 1) / 2));
}

TEST_CASE("jet convolver backends agree") {
  for (int trunc : {3, 5, 8, 13}) {
    TorusSpec torus{0.75, trunc};
    const int levels = 4;
    JetConvolver direct(torus, levels, JetConvolver::Backend::Direct);
    JetConvolver fft(torus, levels, JetConvolver::Backend::PaddedFft);
    std::vector<SpectralField> jets;
    for (int j = 0; j < levels; ++j) {
      jets.push_back(random_field(torus, 200 + 10 * trunc + j, 1.0, 0.1));
      direct.push_level(jets.back());
      fft.push_level(jets.back());
    }
    for (int m = 0; m < levels; ++m) {
      const SpectralField a = direct.pair_sum(m);
      const SpectralField b = fft.pair_sum(m);
      CHECK(coefficient_distance(a, b) <=
            1e-12 * std::max(1.0, l2_norm(a, NormConvention::Coefficient)));
    }
    // The m=0 sum is the plain advection bilinear form.
    const SpectralField adv = bilinear_advection(jets[0], jets[0]);
    CHECK(coefficient_distance(direct.pair_sum(0), adv) <= 1e-14);
  }
}
