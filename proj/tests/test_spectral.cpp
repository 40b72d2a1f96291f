#include <cmath>
#include <complex>
#include <sstream>

#include "doctest.h"
#include "kflow/errors.hpp"
#include "kflow/spectral_field.hpp"

using namespace kflow;

namespace {

SpectralField cos_x(TorusSpec torus, double amplitude = 1.0) {
  SpectralField f(torus);
  f.set_pair({1, 0}, {amplitude / 2.0, 0.0});
  return f;
}

SpectralField cos_y(TorusSpec torus, int m = 1, double amplitude = 1.0) {
  SpectralField f(torus);
  f.set_pair({0, m}, {amplitude / 2.0, 0.0});
  return f;
}

// Discrete divergence from the velocity coefficients.
double div_norm(const VelocityCoefficients& vel) {
  const int n = vel.torus.trunc;
  double sum = 0.0;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      const auto [kx, ky] = wavenumber(vel.torus, {k1, k2});
      const size_t i = static_cast<size_t>(k1 + n) * (2 * n + 1) + (k2 + n);
      sum += std::norm(Complex{0, 1} * (kx * vel.u1[i] + ky * vel.u2[i]));
    }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("wavenumber maps integer indices to physical wavevectors") {
  CHECK(wavenumber({1.0, 5}, {2, 3})[0] == doctest::Approx(2.0));
  CHECK(wavenumber({1.0, 5}, {2, 3})[1] == doctest::Approx(3.0));
  CHECK(wavenumber({0.7, 5}, {1, 1})[1] == doctest::Approx(1.0 / 0.7));
  CHECK(wavenumber({0.75, 5}, {0, 2})[1] == doctest::Approx(2.0 / 0.75));
}

TEST_CASE("l2 norm conventions") {
  TorusSpec torus{1.0, 4};
  CHECK(l2_norm(SpectralField(torus), NormConvention::Coefficient) == 0.0);

  const SpectralField f = cos_y(torus);
  CHECK(l2_norm(f, NormConvention::Coefficient) == doctest::Approx(std::sqrt(0.5)));

  // Grid quadrature of integral(cos^2(y)) over the square torus.
  const int g = 256;
  double quad = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double y = 2.0 * M_PI * j / g;
      quad += std::cos(y) * std::cos(y) * (4.0 * M_PI * M_PI / (g * g));
    }
  CHECK(l2_norm(f, NormConvention::Integral) == doctest::Approx(std::sqrt(quad)).epsilon(1e-12));
}

TEST_CASE("norm convention ratio is sqrt(area) for any nonzero field") {
  for (double beta : {0.7, 1.0, 1.4}) {
    TorusSpec torus{beta, 6};
    const SpectralField f = random_field(torus, 11, 1.0, 0.3);
    const double ratio =
        l2_norm(f, NormConvention::Integral) / l2_norm(f, NormConvention::Coefficient);
    CHECK(ratio == doctest::Approx(std::sqrt(4.0 * M_PI * M_PI * beta)).epsilon(1e-14));
  }
}

TEST_CASE("velocity recovery: hand-solved cases") {
  TorusSpec torus{1.0, 3};
  SUBCASE("zero field") {
    const auto vel = velocity_from_vorticity(SpectralField(torus));
    for (const auto& u : vel.u1) CHECK(std::abs(u) == 0.0);
    for (const auto& u : vel.u2) CHECK(std::abs(u) == 0.0);
  }
  SUBCASE("omega = cos(x) gives v = (0, sin x)") {
    const auto vel = velocity_from_vorticity(cos_x(torus));
    const SpectralField probe = cos_x(torus);
    const size_t i = probe.flat_index({1, 0});
    CHECK(std::abs(vel.u1[i]) == doctest::Approx(0.0));
    // sin(x) has coefficient -i/2 at k=(1,0)
    CHECK(vel.u2[i].real() == doctest::Approx(0.0));
    CHECK(vel.u2[i].imag() == doctest::Approx(-0.5));
  }
  SUBCASE("omega = cos(y/beta) gives v = (-beta sin(y/beta), 0)") {
    TorusSpec torus_b{0.75, 3};
    const auto vel = velocity_from_vorticity(cos_y(torus_b));
    const SpectralField probe = cos_y(torus_b);
    const size_t i = probe.flat_index({0, 1});
    CHECK(vel.u1[i].real() == doctest::Approx(0.0));
    CHECK(vel.u1[i].imag() == doctest::Approx(0.75 * 0.5));
    CHECK(std::abs(vel.u2[i]) == doctest::Approx(0.0));
  }
}

TEST_CASE("velocity round trip and divergence, random fields") {
  for (int trunc : {3, 7, 13}) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      TorusSpec torus{0.7, trunc};
      const SpectralField f = random_field(torus, seed, 1.0, 0.2);
      const auto vel = velocity_from_vorticity(f);
      const SpectralField back = vorticity_from_velocity(vel);
      CHECK(coefficient_distance(back, f) <=
            1e-14 * l2_norm(f, NormConvention::Coefficient));
      double unorm = 0.0;
      for (size_t i = 0; i < vel.u1.size(); ++i)
        unorm += std::norm(vel.u1[i]) + std::norm(vel.u2[i]);
      CHECK(div_norm(vel) <= 1e-14 * std::sqrt(unorm));
    }
  }
}

TEST_CASE("velocity recovery rejects nonzero-mean input") {
  // The mean slot has no write path, so a nonzero mean cannot be constructed;
  // writing it is the rejected operation.
  SpectralField f(TorusSpec{1.0, 2});
  CHECK_THROWS_AS(f.set_pair({0, 0}, {1.0, 0.0}), ConfigError);
  CHECK_NOTHROW(f.set_pair({0, 0}, {0.0, 0.0}));
}

TEST_CASE("field shift") {
  TorusSpec torus{0.75, 3};
  SUBCASE("zero displacement is the identity") {
    const SpectralField f = random_field(torus, 5);
    CHECK(coefficient_distance(field_shift(f, {0.0, 0.0}), f) == 0.0);
  }
  SUBCASE("cos(x) shifted by pi/2 becomes -sin(x)") {
    const SpectralField g = field_shift(cos_x(torus), {M_PI / 2, 0.0});
    // -sin(x) has coefficient +i/2 at k=(1,0)
    CHECK(g.at(1, 0).real() == doctest::Approx(0.0));
    CHECK(g.at(1, 0).imag() == doctest::Approx(0.5));
  }
  SUBCASE("full period in y is the identity") {
    const SpectralField f = cos_y(torus, 2);
    const SpectralField g = field_shift(f, {0.0, M_PI * torus.beta});
    CHECK(coefficient_distance(f, g) <= 1e-15);
  }
  SUBCASE("shifts compose additively") {
    const SpectralField f = random_field(torus, 17, 1.0, 0.1);
    const SpectralField once = field_shift(field_shift(f, {0.3, -0.2}), {1.1, 0.7});
    const SpectralField twice = field_shift(f, {1.4, 0.5});
    CHECK(coefficient_distance(once, twice) <=
          1e-14 * l2_norm(f, NormConvention::Coefficient));
  }
}

TEST_CASE("physical evaluation") {
  TorusSpec torus{0.6, 3};
  CHECK(evaluate_physical(SpectralField(torus), {0.3, 0.4}) == 0.0);
  CHECK(evaluate_physical(cos_x(torus), {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(evaluate_physical(cos_y(torus), {0.0, M_PI * torus.beta / 2}) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("field CSV round trip on the Hermitian half") {
  TorusSpec torus{0.7, 4};
  const SpectralField f = random_field(torus, 23, 2.0, 0.1);
  std::stringstream buffer;
  write_field_csv(buffer, f);
  const SpectralField g = read_field_csv(buffer, torus);
  CHECK(max_coefficient_difference(f, g) == 0.0);  // 17 digits is lossless

  SUBCASE("header is required") {
    std::stringstream bad("1,0,0.5,0\n");
    CHECK_THROWS_AS(read_field_csv(bad, torus), ConfigError);
  }
  SUBCASE("rows outside the Hermitian half are rejected") {
    std::stringstream bad("k1,k2,re,im\n-1,0,0.5,0\n");
    CHECK_THROWS_AS(read_field_csv(bad, torus), ConfigError);
    std::stringstream zero("k1,k2,re,im\n0,0,0.5,0\n");
    CHECK_THROWS_AS(read_field_csv(zero, torus), ConfigError);
  }
}

TEST_CASE("random fields are deterministic in the seed") {
  TorusSpec torus{0.8, 5};
  CHECK(max_coefficient_difference(random_field(torus, 42), random_field(torus, 42)) == 0.0);
  CHECK(max_coefficient_difference(random_field(torus, 42), random_field(torus, 43)) > 0.0);
}
