#include "rdlab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rdlab {

namespace {

constexpr double kE2 = kEuler * kEuler;
constexpr double kEdgeGuard = 1e-6;

void require_exponents(double m, double p) {
  if (!(m > 1.0 && p > 1.0 && p < m))
    throw std::invalid_argument("barrier: need 1 < p < m");
}

// Pieces shared by both barriers: C zeta B^mu with zeta = (shift+t)^alpha,
// eta = (shift+t)^{-beta}.
struct Clock {
  double s;
  double zeta;
  double eta;
};

Clock clock_at(const BarrierParams &bp, double t) {
  if (!(t >= 0.0))
    throw std::invalid_argument("barrier: t must be >= 0");
  const double s = bp.T + t;
  return {s, std::pow(s, bp.alpha), std::pow(s, -bp.beta)};
}

// Residual for w = C zeta B^mu, B = 1 - q(r) eta / a, where q is the radial
// profile (s-profile or r), qp = q', lap_q = q'' + drift q', inv_rho = 1/rho.
double bracket_residual(const BarrierParams &bp, const Clock &c, double m, double p, double q,
                        double qp, double lap_q, double inv_rho) {
  const double mu = 1.0 / (m - 1.0);
  const double B = 1.0 - q * c.eta / bp.a;
  if (B <= 0.0)
    return 0.0;
  if (B <= kEdgeGuard)
    throw std::domain_error("barrier residual: too close to the free boundary");
  const double Bmu = std::pow(B, mu);
  const double Bmu1 = std::pow(B, mu - 1.0);
  const double w = bp.C * c.zeta * Bmu;
  const double B_t = bp.beta * q * c.eta / (bp.a * c.s);
  const double w_t = bp.C * c.zeta * (bp.alpha / c.s * Bmu + mu * Bmu1 * B_t);
  const double k = c.eta / bp.a;
  const double lap = std::pow(bp.C * c.zeta, m) * (m * mu) *
                     (mu * Bmu1 * k * k * qp * qp - Bmu * k * lap_q);
  return w_t - inv_rho * lap - std::pow(w, p);
}

} // namespace

BarrierParams BarrierParams::make(double C, double a, double alpha, double T, double m,
                                  BarrierTarget target) {
  return BarrierParams{C, a, alpha, 0.5 * (alpha * (m - 1.0) + 1.0), T, target};
}

SProfile s_profile(double r) {
  if (!(r >= 0.0))
    throw std::invalid_argument("s_profile: r must be >= 0");
  if (r >= kEuler)
    return {std::log(r), 1.0 / r, -1.0 / (r * r)};
  return {(r * r + kE2) / (2.0 * kE2), r / kE2, 1.0 / kE2};
}

double barrier_K(double m, double p) {
  require_exponents(m, p);
  const double c = (m - 1.0) / (p + m - 2.0);
  return std::pow(c, (m - 1.0) / (p - 1.0)) - std::pow(c, (p + m - 2.0) / (p - 1.0));
}

double barrier_phi(double F, double sigma, double delta, double gamma, double m, double p) {
  return sigma * F - delta - gamma * std::pow(F, (p + m - 2.0) / (m - 1.0));
}

BarrierEnvelope envelope(double t, const BarrierParams &bp, double m, double p,
                         const WeightEnvelope &env, int N) {
  require_exponents(m, p);
  const Clock c = clock_at(bp, t);
  const double s = c.s;
  const double al = bp.alpha;
  const double be = bp.beta;
  const double ca = std::pow(bp.C, m - 1.0) / bp.a;
  BarrierEnvelope e{};
  e.t = t;
  e.sigma = (al - be / (m - 1.0)) * std::pow(s, al - 1.0) +
            ca * (m / (m - 1.0)) * env.k2 * (N - 2.0) * std::pow(s, m * al - be);
  e.delta = -be / (m - 1.0) * std::pow(s, al - 1.0) +
            (ca / bp.a) * (m / ((m - 1.0) * (m - 1.0))) * env.k1 * std::pow(s, m * al - 2.0 * be);
  e.gamma = std::pow(bp.C, p - 1.0) * std::pow(s, p * al);
  e.K = barrier_K(m, p);
  const double ratio = (m - 1.0) / (p + m - 2.0) * e.sigma / e.gamma;
  e.F0 = ratio > 0.0 ? std::pow(ratio, (m - 1.0) / (p - 1.0)) : 0.0;
  e.phi_F0 = barrier_phi(e.F0, e.sigma, e.delta, e.gamma, m, p);
  e.sigma0 = (al - be / (m - 1.0)) * std::pow(s, al - 1.0) +
             env.rho2 * (N / kE2) * (m / (m - 1.0)) * ca * std::pow(s, m * al - be);
  e.delta0 = -be / (m - 1.0) * std::pow(s, al - 1.0);
  return e;
}

bool FeasibilityReport::pass() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult &c) { return c.pass; });
}

const ConditionResult *FeasibilityReport::find(const std::string &name) const {
  for (const auto &c : conditions)
    if (c.name == name)
      return &c;
  return nullptr;
}

std::vector<double> default_barrier_time_grid(int count) {
  if (count < 3)
    throw std::invalid_argument("default_barrier_time_grid: need at least 3 points");
  std::vector<double> out{0.0};
  const double lo = std::log(1e-3);
  const double hi = std::log(1e4);
  for (int i = 0; i < count - 1; ++i)
    out.push_back(std::exp(lo + (hi - lo) * i / (count - 2)));
  return out;
}

FeasibilityReport validate_barrier(const BarrierParams &bp, double m, double p,
                                   const WeightEnvelope &env, int N,
                                   std::span<const double> t_grid) {
  require_exponents(m, p);
  FeasibilityReport rep;
  auto add = [&](std::string name, double margin) {
    rep.conditions.push_back({std::move(name), margin >= 0.0, margin});
  };

  const double beta_expected = 0.5 * (bp.alpha * (m - 1.0) + 1.0);
  const double beta_gap = std::abs(bp.beta - beta_expected);
  add("beta_relation", beta_gap <= 1e-12 ? 0.0 : -beta_gap);
  add("alpha_range", std::min(bp.alpha, 1.0 / (m - 1.0) - bp.alpha));
  add("positive_parameters", std::min({bp.C, bp.a, bp.T}));
  if (bp.target == BarrierTarget::manifold)
    return rep;

  if (!(bp.C > 0.0 && bp.a > 0.0 && bp.T > 0.0))
    return rep;
  add("shift_window", 0.5 * bp.a - std::pow(bp.T, -bp.beta));
  add("C_threshold", std::pow(bp.C, m - 1.0) / bp.a - 2.0 * bp.beta * (m - 1.0) / (m * env.k1));

  // Sampled conditions, as relative slacks so that margins are comparable
  // across decades of t.
  auto sampled = [&](std::string name, auto &&slack) {
    ConditionResult r{std::move(name), true, std::numeric_limits<double>::infinity(), true, 0.0};
    for (double t : t_grid) {
      const double v = slack(envelope(t, bp, m, p, env, N));
      if (v < r.margin) {
        r.margin = v;
        r.worst_t = t;
      }
    }
    r.pass = r.margin >= 0.0;
    rep.conditions.push_back(r);
  };
  const double ea = (p + m - 2.0) / (p - 1.0);
  const double eg = (m - 1.0) / (p - 1.0);
  sampled("outer_a", [&](const BarrierEnvelope &e) {
    const double lhs = e.K * std::pow(std::max(e.sigma, 0.0), ea);
    const double rhs = e.delta * std::pow(e.gamma, eg);
    return (rhs - lhs) / std::max(std::abs(lhs), std::abs(rhs));
  });
  sampled("outer_b", [&](const BarrierEnvelope &e) {
    const double lhs = (m - 1.0) * e.sigma;
    const double rhs = (p + m - 2.0) * e.gamma;
    return (rhs - lhs) / std::max(std::abs(lhs), std::abs(rhs));
  });
  sampled("inner_ball", [&](const BarrierEnvelope &e) {
    const double lhs = std::pow(2.0, (p + m - 2.0) / (m - 1.0)) * (e.sigma0 - e.delta0);
    return (e.gamma - lhs) / std::max(std::abs(lhs), std::abs(e.gamma));
  });

  // Dominant monomials as t -> infinity.
  const double al = bp.alpha;
  const double be = bp.beta;
  const double e_sigma = std::max(al - 1.0, m * al - be);
  const double e_delta = std::max(al - 1.0, m * al - 2.0 * be);
  const double e_gamma = p * al;
  add("asymptotic_outer_a", (e_delta + eg * e_gamma) - ea * e_sigma);
  add("asymptotic_outer_b", e_gamma - e_sigma);
  add("asymptotic_inner", e_gamma - e_sigma);
  return rep;
}

double subsolution_bracket(double r, double t, const BarrierParams &bp) {
  const Clock c = clock_at(bp, t);
  return 1.0 - s_profile(r).value * c.eta / bp.a;
}

double subsolution_eval(double r, double t, const BarrierParams &bp, double m) {
  const Clock c = clock_at(bp, t);
  const double B = 1.0 - s_profile(r).value * c.eta / bp.a;
  if (B <= 0.0)
    return 0.0;
  return bp.C * c.zeta * std::pow(B, 1.0 / (m - 1.0));
}

double subsolution_residual(double r, double t, const BarrierParams &bp, double m, double p,
                            const Weight &weight, int N) {
  require_exponents(m, p);
  const Clock c = clock_at(bp, t);
  const SProfile sp = s_profile(r);
  // Lap s = s'' + (N-1)/r s'; inside B_e this is N/e^2, including r = 0.
  const double lap_s = r >= kEuler ? (N - 2.0) / (r * r) : N / kE2;
  return bracket_residual(bp, c, m, p, sp.value, sp.derivative, lap_s, 1.0 / weight(r));
}

double subsolution_power_derivative(double r, double t, const BarrierParams &bp, double m,
                                    bool outer_piece) {
  const Clock c = clock_at(bp, t);
  const double s = outer_piece ? std::log(r) : (r * r + kE2) / (2.0 * kE2);
  const double sp = outer_piece ? 1.0 / r : r / kE2;
  const double B = 1.0 - s * c.eta / bp.a;
  if (B <= 0.0)
    return 0.0;
  const double mu = 1.0 / (m - 1.0);
  return std::pow(bp.C * c.zeta, m) * (m * mu) * std::pow(B, mu) * (-c.eta / bp.a * sp);
}

double manifold_barrier_eval(double r, double t, const BarrierParams &bp, double m) {
  if (!(r >= 0.0))
    throw std::invalid_argument("manifold_barrier_eval: r must be >= 0");
  const Clock c = clock_at(bp, t);
  const double B = 1.0 - r / bp.a * c.eta;
  if (B <= 0.0)
    return 0.0;
  return bp.C * c.zeta * std::pow(B, 1.0 / (m - 1.0));
}

double manifold_support_radius(double t, const BarrierParams &bp) {
  return bp.a * std::pow(bp.T + t, bp.beta);
}

double manifold_barrier_residual(double r, double t, const BarrierParams &bp, double m, double p,
                                 const RadialGeometry &geom) {
  require_exponents(m, p);
  if (!(r > 0.0))
    throw std::invalid_argument("manifold_barrier_residual: r must be > 0");
  const Clock c = clock_at(bp, t);
  return bracket_residual(bp, c, m, p, r, 1.0, geom.drift(r), 1.0);
}

ResidualSweep residual_sweep(const BarrierParams &bp, double m, double p, const Weight &weight,
                             int N, int samples, double t_max, double lo, double hi,
                             unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ResidualSweep out;
  out.max_residual = -std::numeric_limits<double>::infinity();
  out.max_outer = out.max_residual;
  out.max_inner = out.max_residual;
  constexpr int kMaxDraws = 100000;
  // Range of s = a (1 - B) (T + t)^beta over the sampling box; a region
  // that it cannot reach is skipped instead of redrawn.
  const double s_min = bp.a * (1.0 - hi) * std::pow(bp.T, bp.beta);
  const double s_max = bp.a * (1.0 - lo) * std::pow(bp.T + t_max, bp.beta);
  const bool outer_reachable = s_max >= 1.0;
  const bool inner_reachable = s_min < 1.0 && s_max >= 0.5;
  for (int k = 0; k < samples; ++k) {
    const bool outer = (k % 2 == 0);
    if (outer ? !outer_reachable : !inner_reachable)
      continue;
    double r = 0.0;
    double t = 0.0;
    bool found = false;
    for (int draw = 0; draw < kMaxDraws && !found; ++draw) {
      t = t_max * unit(rng);
      const double B = lo + (hi - lo) * unit(rng);
      const double s = bp.a * (1.0 - B) * std::pow(bp.T + t, bp.beta);
      if (outer && s >= 1.0) {
        r = std::exp(s);
        found = true;
      } else if (!outer && s >= 0.5 && s < 1.0) {
        r = kEuler * std::sqrt(2.0 * s - 1.0);
        found = true;
      }
    }
    if (!found)
      continue;
    const double res = subsolution_residual(r, t, bp, m, p, weight, N);
    ++out.samples;
    if (outer) {
      ++out.outer_samples;
      out.max_outer = std::max(out.max_outer, res);
    } else {
      ++out.inner_samples;
      out.max_inner = std::max(out.max_inner, res);
    }
    if (res > out.max_residual) {
      out.max_residual = res;
      out.worst_r = r;
      out.worst_t = t;
    }
  }
  return out;
}

} // namespace rdlab
