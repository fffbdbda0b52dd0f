#include "rdlab/geometry.hpp"
#include "rdlab/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rdlab;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
} // namespace

TEST_CASE("sphere area on the model spaces") {
  const auto euc = RadialGeometry::euclidean(3);
  const auto hyp = RadialGeometry::hyperbolic(3, 1.0);
  CHECK(euc.sphere_area(1.0) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(hyp.sphere_area(0.0) == 0.0);
  const double sh = 1.1752011936438014;
  CHECK(hyp.sphere_area(1.0) == doctest::Approx(4.0 * kPi * sh * sh).epsilon(1e-13));
  CHECK(hyp.sphere_area(1.0) == doctest::Approx(17.3557).epsilon(1e-4));
  CHECK_THROWS_AS(euc.sphere_area(-1.0), std::invalid_argument);

  // curvature kappa rescales the radius: S_kappa(r) = kappa^{-(N-1)/2} S_1(sqrt(kappa) r)
  const auto hyp4 = RadialGeometry::hyperbolic(3, 4.0);
  CHECK(hyp4.sphere_area(0.7) == doctest::Approx(hyp.sphere_area(1.4) / 4.0).epsilon(1e-13));
}

TEST_CASE("drift coefficient") {
  const auto euc = RadialGeometry::euclidean(3);
  const auto hyp = RadialGeometry::hyperbolic(3, 1.0);
  CHECK(euc.drift(2.0) == doctest::Approx(1.0));
  CHECK(hyp.drift(1.0) == doctest::Approx(2.0 / std::tanh(1.0)).epsilon(1e-13));
  CHECK(hyp.drift(40.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hyp.asymptotic_drift() == doctest::Approx(2.0));
  CHECK(euc.asymptotic_drift() == 0.0);
  CHECK_THROWS_AS(hyp.drift(0.0), std::invalid_argument);

  // drift = S'/S against a centred difference of S
  for (double r : {0.3, 1.0, 3.0}) {
    const double h = 1e-5;
    const double fd = (hyp.sphere_area(r + h) - hyp.sphere_area(r - h)) / (2 * h) / hyp.sphere_area(r);
    CHECK(hyp.drift(r) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("weight families") {
  const auto w = Weight::inverse_square();
  CHECK(w(0.0) == doctest::Approx(1.0));
  CHECK(w(kE) == doctest::Approx(0.5));
  const auto env = w.envelope();
  REQUIRE(env);
  CHECK(env->k1 == doctest::Approx(1.0 / (kE * kE)));
  CHECK(env->k2 == doctest::Approx(2.0 / (kE * kE)));
  CHECK(env->rho1 == doctest::Approx(1.0));
  CHECK(env->rho2 == doctest::Approx(2.0));
  CHECK_FALSE(Weight::unit().envelope());
  CHECK(Weight::integrable(4.0).integrable_in(3));
  CHECK_FALSE(Weight::integrable(3.0).integrable_in(3));
  CHECK_FALSE(Weight::unit().integrable_in(3));
}

TEST_CASE("inverse_square envelope holds on 1e5 samples") {
  const auto w = Weight::inverse_square();
  const auto env = *w.envelope();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> outer(kE, 100.0 * kE);
  std::uniform_real_distribution<double> inner(0.0, kE);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double r = outer(rng);
    const double inv = 1.0 / w(r);
    if (!(env.k1 * r * r <= inv * (1 + 1e-14) && inv <= env.k2 * r * r * (1 + 1e-14)))
      ++violations;
    const double s = inner(rng);
    const double inv_in = 1.0 / w(s);
    if (!(env.rho1 <= inv_in * (1 + 1e-14) && inv_in <= env.rho2 * (1 + 1e-14)))
      ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("weight total mass") {
  CHECK(weight_total_mass(Weight::integrable(4.0), 3, kInfinity) ==
        doctest::Approx(kPi * kPi).epsilon(1e-9));
  CHECK(weight_total_mass(Weight::unit(), 3, 1.0) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
  CHECK(weight_total_mass(Weight::integrable(4.0), 3, 0.0) == 0.0);
  // closed form on a finite ball: 4 pi (atan R - R/(1+R^2)) / 2
  const double R = 3.0;
  CHECK(weight_total_mass(Weight::integrable(4.0), 3, R) ==
        doctest::Approx(2.0 * kPi * (std::atan(R) - R / (1 + R * R))).epsilon(1e-10));
  CHECK_THROWS(weight_total_mass(Weight::unit(), 3, kInfinity));
}

TEST_CASE("cell measures add up to the weighted ball volume") {
  for (const auto &w : {Weight::unit(), Weight::inverse_square(), Weight::integrable(4.0)}) {
    const Grid g(RadialGeometry::euclidean(3), w, 7.0, 300);
    double sum = 0.0;
    for (double x : g.measures())
      sum += x;
    CHECK(sum == doctest::Approx(weight_total_mass(w, 3, 7.0)).epsilon(1e-8));
  }
  const Grid g(RadialGeometry::hyperbolic(3, 1.0), Weight::unit(), 2.0, 200);
  double vol = 0.0;
  for (double x : g.volumes())
    vol += x;
  // integral of 4 pi sinh^2 r over [0, 2]
  CHECK(vol == doctest::Approx(4.0 * kPi * (std::sinh(4.0) / 4.0 - 1.0)).epsilon(1e-10));
}

TEST_CASE("grid layout") {
  const Grid g(RadialGeometry::euclidean(3), Weight::unit(), 1.0, 4);
  CHECK(g.size() == 4);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.center(0) == doctest::Approx(0.125));
  CHECK(g.faces().size() == 5);
  CHECK(g.faces().back() == doctest::Approx(1.0));
  CHECK_THROWS(Grid(RadialGeometry::euclidean(3), Weight::unit(), -1.0, 4));
  CHECK_THROWS(Grid(RadialGeometry::euclidean(3), Weight::unit(), 1.0, 0));
}
