#include "rdlab/estimates.hpp"
#include "rdlab/tridiagonal.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace rdlab;

namespace {

// Gamma_i evaluated as a sum of logarithms, independently of the library.
double log_domain_gamma(double power, double m, int N, double C_s) {
  const double n = N;
  const double theta = power * n / (m * (n + 2));
  const double log_inner = theta * std::log(theta) + 2 * m * (1 + 2 / n) * std::log(2.0) +
                           (n + 2) / n * std::log((n + 2) / n) - 2 * std::log(C_s);
  const double log_value = n / (m * (n + 2)) * std::log1p(-theta) + std::log(2.0) +
                           n / (2 * m + n * (m - power)) * log_inner;
  return std::exp(log_value);
}

// Brute force g(k) = sum mu_i (|v_i| - k)_+.
double brute_g(const std::vector<double> &v, const std::vector<double> &mu, double k) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += mu[i] * std::max(0.0, std::abs(v[i]) - k);
  return s;
}

double brute_level(const std::vector<double> &v, const std::vector<double> &mu, double k) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > k)
      s += mu[i];
  return s;
}

} // namespace

TEST_CASE("Young splitting examples") {
  const auto z = young_split(0.0, 0.1, 2.0, 1.5, 2.0);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(young_constant(0.1, 2.0, 1.5) == doctest::Approx(5.0));
  const auto one = young_split(1.0, 0.1, 2.0, 1.5, 2.0);
  CHECK(one.lhs == doctest::Approx(1.0));
  CHECK(one.rhs == doctest::Approx(5.1));
  CHECK_THROWS(young_split(-1.0, 0.1, 2.0, 1.5, 2.0));
  CHECK_THROWS(young_constant(0.0, 2.0, 1.5));
}

TEST_CASE("Young splitting holds on 1e4 random samples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double m = 1.05 + 4.0 * u01(rng);
    const double p = 1.0 + (m - 1.0) * (0.02 + 0.96 * u01(rng));
    const double q = 1.0 + 9.0 * u01(rng);
    const double eps = std::exp(-6.0 + 12.0 * u01(rng));
    const double x = std::exp(-8.0 + 16.0 * u01(rng));
    const auto s = young_split(x, eps, m, p, q);
    if (!(s.lhs <= s.rhs * (1 + 1e-12)))
      ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("growth rate C(q)") {
  CHECK(lq_eps_threshold(2.0, 2.0, 1.0) == doctest::Approx(8.0 / 9.0));
  CHECK(cq_constant(2.0, 2.0, 1.5, 1.0) == doctest::Approx(2.25));
  const double c2 = cq_constant(2.0, 2.0, 1.5, 1.0);
  const double c10 = cq_constant(10.0, 2.0, 1.5, 1.0);
  const double c100 = cq_constant(100.0, 2.0, 1.5, 1.0);
  CHECK(c2 < c10);
  CHECK(c10 < c100);
  CHECK_THROWS(cq_constant(2.0, 2.0, 1.5, 0.0));
  CHECK_THROWS(cq_constant(2.0, 1.5, 2.0, 1.0));
}

TEST_CASE("Gamma constants: dual evaluation and monotonicity") {
  const auto g = gamma_constants(2.0, 1.5, 3, 1.0);
  CHECK(g.gamma1 == doctest::Approx(log_domain_gamma(1.5, 2.0, 3, 1.0)).epsilon(1e-12));
  CHECK(g.gamma2 == doctest::Approx(log_domain_gamma(1.0, 2.0, 3, 1.0)).epsilon(1e-12));
  CHECK(g.gamma >= g.gamma1);
  CHECK(g.gamma >= g.gamma2);
  for (double Cs : {0.3, 1.0, 2.0, 5.0}) {
    const auto a = gamma_constants(2.0, 1.5, 3, Cs);
    const auto b = gamma_constants(2.0, 1.5, 3, 2 * Cs);
    CHECK(b.gamma1 < a.gamma1);
    CHECK(b.gamma2 < a.gamma2);
  }
  for (int N : {3, 4, 7})
    for (double m : {1.5, 2.0, 4.0}) {
      const double p = 1.0 + 0.5 * (m - 1.0);
      const auto c = gamma_constants(m, p, N, 1.7);
      CHECK(c.gamma1 == doctest::Approx(log_domain_gamma(p, m, N, 1.7)).epsilon(1e-11));
      CHECK(c.gamma2 == doctest::Approx(log_domain_gamma(1.0, m, N, 1.7)).epsilon(1e-11));
    }
}

TEST_CASE("smoothing exponents and bound shape") {
  const auto e = smoothing_exponents(2.0, 1.5, 3);
  CHECK(e.reaction == doctest::Approx(8.0 / 11.0));
  CHECK(e.diffusion == doctest::Approx(4.0 / 7.0));
  CHECK(e.time == doctest::Approx(3.0 / 7.0));
  for (int N : {3, 5, 10})
    for (double m : {1.1, 2.0, 3.5}) {
      const auto x = smoothing_exponents(m, 1.05, N);
      CHECK(x.diffusion + (m - 1) * x.time == doctest::Approx(1.0).epsilon(1e-14));
    }
  const double G = gamma_constants(2.0, 1.5, 3, 2.0).gamma;
  CHECK(smoothing_bound(1.0, 0.0, 2.0, 1.5, 3, G, 1.0) == 0.0);
  const double b1 = smoothing_bound(1e-4, 1.0, 2.0, 1.5, 3, G, 1.0);
  const double b2 = smoothing_bound(1e-3, 1.0, 2.0, 1.5, 3, G, 1.0);
  const double b3 = smoothing_bound(1e-2, 1.0, 2.0, 1.5, 3, G, 1.0);
  CHECK(b1 > b2);
  CHECK(b2 > b3);
  const double c1 = smoothing_bound(10.0, 1.0, 2.0, 1.5, 3, G, 1.0);
  const double c2 = smoothing_bound(20.0, 1.0, 2.0, 1.5, 3, G, 1.0);
  CHECK(c2 > c1);
}

TEST_CASE("fitted smoothing constants dominate every sample") {
  const std::vector<double> t = {0.01, 0.1, 1.0};
  const std::vector<double> v = {3.0, 1.5, 2.0};
  const auto fit = fit_smoothing_constants(t, v, 1.0, 2.0, 1.5, 3, 0.5);
  CHECK(fit.c2 == 0.5);
  const auto e = smoothing_exponents(2.0, 1.5, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double shape = std::exp(0.5 * t[i]) * (1.0 + std::pow(t[i], -e.time));
    worst = std::max(worst, v[i] / shape);
    CHECK(v[i] <= fit.c1 * shape * (1 + 1e-12));
  }
  CHECK(fit.c1 == doctest::Approx(worst));
}

TEST_CASE("Stampacchia bound examples") {
  CHECK(stampacchia_bound(1.0, 2.0, 1.0, 0.0) == doctest::Approx(2.0));
  CHECK(stampacchia_bound(1.0, 2.0, 1.0, 0.5) ==
        doctest::Approx(stampacchia_bound(1.0, 2.0, 1.0, 0.0) + 0.5));
  CHECK(stampacchia_exponent(3, 2.0) == doctest::Approx(7.0 / 6.0));
  CHECK(stampacchia_exponent(3, kInfinity) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS(stampacchia_bound(1.0, 1.0, 1.0, 0.0));
}

TEST_CASE("Stampacchia level-set oracle, exhaustive small instances") {
  // every profile with values in {0, 0.5, 1, 2} on 6 cells, fixed measures
  const std::vector<double> mu = {0.3, 1.0, 0.05, 2.0, 0.7, 0.15};
  const double vals[4] = {0.0, 0.5, 1.0, 2.0};
  int violations = 0;
  int checked = 0;
  for (int code = 0; code < 4096; ++code) {
    std::vector<double> v(6);
    int c = code;
    for (int i = 0; i < 6; ++i, c /= 4)
      v[i] = (i % 2 ? -1.0 : 1.0) * vals[c % 4];
    const StampacchiaInstance inst(v, mu);
    for (double s : {1.2, 5.0 / 3.0, 3.0})
      for (double kbar : {0.0, 0.25, 1.0}) {
        const double C = inst.minimal_constant(s, kbar);
        // the hypothesis g(k) <= C mu(A_k)^s at every level above kbar
        for (double k = kbar; k <= 2.0; k += 0.01)
          if (brute_g(v, mu, k) > C * std::pow(brute_level(v, mu, k), s) * (1 + 1e-9) + 1e-14)
            ++violations;
        const double bound = stampacchia_bound(C, s, inst.l1_norm(), kbar);
        if (!(inst.linf_norm() <= bound * (1 + 1e-12)))
          ++violations;
        ++checked;
      }
  }
  CHECK(checked == 4096 * 9);
  CHECK(violations == 0);
}

TEST_CASE("Stampacchia level-set oracle, random 64-cell instances") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 64;
    std::vector<double> v(n), mu(n);
    for (int i = 0; i < n; ++i) {
      v[i] = std::pow(u01(rng), 3) * 10.0 * (u01(rng) < 0.5 ? -1 : 1);
      mu[i] = 0.01 + u01(rng);
    }
    const StampacchiaInstance inst(v, mu);
    CHECK(inst.g(0.0) == doctest::Approx(inst.l1_norm()));
    CHECK(inst.total_measure() == doctest::Approx(brute_level(v, mu, -1.0)));
    const double s = 1.0 + 2.0 * u01(rng);
    const double kbar = u01(rng) * inst.linf_norm();
    const double C = inst.minimal_constant(s, kbar);
    if (!(inst.linf_norm() <= stampacchia_bound(C, s, inst.g(kbar), kbar) * (1 + 1e-12)))
      ++violations;
    // weighted form with kbar = 0 and the total measure as the weight mass
    const double C0 = inst.minimal_constant(s, 0.0);
    if (!(inst.linf_norm() <= weighted_stampacchia_bound(C0, s, inst.total_measure()) * (1 + 1e-12)))
      ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("g is non-increasing with slope -mu(A_k)") {
  const std::vector<double> v = {0.2, 1.0, -0.7, 3.0, 2.5};
  const std::vector<double> mu = {1.0, 0.5, 2.0, 0.1, 0.3};
  const StampacchiaInstance inst(v, mu);
  double prev = inst.g(0.0);
  for (double k = 0.0; k < 3.5; k += 0.013) {
    const double g = inst.g(k);
    CHECK(g <= prev + 1e-15);
    CHECK(g == doctest::Approx(brute_g(v, mu, k)).epsilon(1e-13));
    prev = g;
    const double h = 1e-7;
    const double slope = (inst.g(k + h) - inst.g(k)) / h;
    bool at_level = false;
    for (double x : v)
      at_level = at_level || std::abs(std::abs(x) - k) < 2 * h;
    if (!at_level)
      CHECK(slope == doctest::Approx(-inst.level_measure(k)).epsilon(1e-6));
  }
  CHECK(inst.minimal_constant(2.0, 10.0) == 0.0);
}

TEST_CASE("elliptic bound dominates a radial Poisson solve") {
  // -Lap v = f on B_1 in R^3, v = 0 on the sphere, finite-volume solve
  const Grid grid(RadialGeometry::euclidean(3), Weight::unit(), 1.0, 400);
  const int n = grid.size();
  const auto faces = grid.faces();
  const auto area = grid.face_areas();
  auto f = [](double r) { return 2.0 + std::cos(3.0 * r); };
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n);
  const double dr = grid.spacing();
  for (int i = 0; i < n; ++i) {
    rhs[i] = f(grid.center(i)) * grid.volumes()[i];
    if (i > 0) {
      const double c = area[i] / dr;
      di[i] += c;
      lo[i] = -c;
    }
    const double c = i + 1 < n ? area[i + 1] / dr : area[n] / (0.5 * dr);
    di[i] += c;
    if (i + 1 < n)
      up[i] = -c;
  }
  (void)faces;
  const auto v = solve_tridiagonal(lo, di, up, rhs);
  double vmax = 0.0, v1 = 0.0, fm = 0.0;
  const double m1 = 4.0;
  for (int i = 0; i < n; ++i) {
    vmax = std::max(vmax, v[i]);
    v1 += v[i] * grid.volumes()[i];
    fm += std::pow(f(grid.center(i)), m1) * grid.volumes()[i];
  }
  fm = std::pow(fm, 1.0 / m1);
  // vmax is close to the constant-density value (2+cos)/6 scale
  CHECK(vmax > 0.3);
  EllipticBoundInput in{fm, 0.0, m1, m1, 3, sharp_euclidean_sobolev_constant(3), std::nullopt};
  for (double kbar : {0.01, 0.1, 0.5})
    CHECK(vmax <= elliptic_linf_bound(in, v1, kbar));
  CHECK(elliptic_linf_bound(in, 0.0, 0.2) == doctest::Approx(0.2));
  CHECK(default_auxiliary_exponent(3, 4.0, 6.0) == doctest::Approx(2.75));
  CHECK_THROWS(default_auxiliary_exponent(3, kInfinity, kInfinity));
  EllipticBoundInput bad = in;
  bad.m1 = 1.0;
  CHECK_THROWS(elliptic_linf_bound(bad, 1.0, 0.1));
}

TEST_CASE("weighted elliptic bound") {
  EllipticBoundInput in{1.3, 0.0, 4.0, 5.0, 3, 2.0, std::nullopt};
  const double only_f1 = weighted_elliptic_bound(in, 3.0);
  in.f1_norm = 1.0;
  const double unit_f1 = weighted_elliptic_bound(in, 3.0);
  CHECK(only_f1 == doctest::Approx(1.3 * unit_f1));
  double prev = 0.0;
  for (double mass : {0.5, 1.0, 2.0, 10.0}) {
    const double b = weighted_elliptic_bound(in, mass);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("absolute bound") {
  CHECK(absolute_bound(1.0, 2.0, 1.0) == doctest::Approx(2.0));
  CHECK(absolute_bound(1e12, 2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(absolute_bound(1e-12, 2.0, 1.0) > 1e11);
  CHECK_THROWS(absolute_bound(0.0, 2.0, 1.0));
}

TEST_CASE("sharp Euclidean Sobolev constant") {
  // sqrt(3/4) (2 pi^2)^{1/3}
  CHECK(sharp_euclidean_sobolev_constant(3) ==
        doctest::Approx(std::sqrt(0.75) * std::cbrt(2 * std::numbers::pi * std::numbers::pi)));
}

TEST_CASE("bound constants bundle") {
  const auto b = make_bound_constants(3, 2.0, 1.5, 1.0, 2.0);
  CHECK(std::isinf(b.l));
  CHECK(b.s == doctest::Approx(5.0 / 3.0));
  CHECK(b.growth_rate(2.0) == doctest::Approx(2.25));
  CHECK(b.gamma.gamma == doctest::Approx(gamma_constants(2.0, 1.5, 3, 2.0).gamma));
}

TEST_CASE("Aronson-Benilan residual") {
  ModelParams p;
  p.m = 2.0;
  p.p = 1.5;
  p.geom = RadialGeometry::hyperbolic(3, 1.0);
  p.R = 10.0;
  p.reaction = false;
  const Solver s(p, 200);
  const State zero{1.0, std::vector<double>(200, 0.0)};
  const auto z = aronson_benilan_residual(s, zero);
  CHECK(z.weighted_positive_part == 0.0);
  CHECK_THROWS(aronson_benilan_residual(s, State{0.0, zero.u}));

  auto run = [&](int n) {
    const Solver sv(p, n);
    TimeSchedule sched = TimeSchedule::log_spaced(0.1, 1.0, 3);
    const auto traj = sv.solve(sv.initial_state([](double r) {
      return r < 2.0 ? (1 - r * r / 4) * (1 - r * r / 4) : 0.0;
    }), sched);
    return aronson_benilan_residual(sv, traj.profiles.back());
  };
  const auto coarse = run(250);
  const auto fine = run(500);
  CHECK(coarse.weighted_positive_part <= 1e-3);
  CHECK(fine.weighted_positive_part <= 0.5 * coarse.weighted_positive_part + 1e-15);
}
