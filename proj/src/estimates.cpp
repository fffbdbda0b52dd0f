#include "rdlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdlab {

namespace {

void require_exponents(double m, double p) {
  if (!(m > 1.0 && p > 1.0 && p < m))
    throw std::invalid_argument("need 1 < p < m");
}

void require_dimension(int N) {
  if (N < 3)
    throw std::invalid_argument("dimension must be >= 3");
}

double inverse(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

} // namespace

double young_constant(double eps, double m, double p) {
  require_exponents(m, p);
  if (!(eps > 0.0))
    throw std::invalid_argument("young_constant: eps must be > 0");
  return std::pow((1.0 / eps) * (p - 1.0) / (m - 1.0), (p - 1.0) / (m - p));
}

YoungSplit young_split(double x, double eps, double m, double p, double q) {
  if (!(x >= 0.0))
    throw std::invalid_argument("young_split: x must be >= 0");
  const double c = young_constant(eps, m, p);
  return {std::pow(x, p + q - 1.0), eps * std::pow(x, m + q - 1.0) + c * std::pow(x, q)};
}

double lq_eps_threshold(double q, double m, double C_p) {
  if (!(q > 1.0))
    throw std::invalid_argument("lq_eps_threshold: q must be > 1");
  const double d = m + q - 1.0;
  return 4.0 * m * (q - 1.0) * C_p * C_p / (d * d);
}

double cq_constant(double q, double m, double p, double C_p) {
  require_exponents(m, p);
  if (!(C_p > 0.0))
    throw std::invalid_argument("cq_constant: Poincare constant must be > 0");
  const double eps = 0.5 * lq_eps_threshold(q, m, C_p);
  return q * young_constant(eps, m, p);
}

GammaConstants gamma_constants(double m, double p, int N, double C_s) {
  require_exponents(m, p);
  require_dimension(N);
  if (!(C_s > 0.0))
    throw std::invalid_argument("gamma_constants: Sobolev constant must be > 0");
  const double n = N;
  const double shared = std::pow(2.0, 2.0 * m * (1.0 + 2.0 / n)) *
                        std::pow((n + 2.0) / n, (n + 2.0) / n) / (C_s * C_s);
  auto branch = [&](double power) {
    const double theta = power * n / (m * (n + 2.0));
    const double outer = std::pow(1.0 - theta, n / (m * (n + 2.0)));
    const double inner = std::pow(theta, theta) * shared;
    return outer * 2.0 * std::pow(inner, n / (2.0 * m + n * (m - power)));
  };
  GammaConstants g;
  g.gamma1 = branch(p);
  g.gamma2 = branch(1.0);
  g.gamma = std::max(g.gamma1, g.gamma2);
  return g;
}

SmoothingExponents smoothing_exponents(double m, double p, int N) {
  require_exponents(m, p);
  require_dimension(N);
  const double n = N;
  return {2.0 * m / (2.0 * m + n * (m - p)), 2.0 * m / (2.0 * m + n * (m - 1.0)),
          n / (2.0 * m + n * (m - 1.0))};
}

double smoothing_bound(double t, double u0_m_norm, double m, double p, int N, double gamma,
                       double C) {
  if (!(t > 0.0))
    throw std::invalid_argument("smoothing_bound: t must be > 0");
  if (!(u0_m_norm >= 0.0))
    throw std::invalid_argument("smoothing_bound: norm must be >= 0");
  const auto e = smoothing_exponents(m, p, N);
  const double grown = std::exp(C * t) * u0_m_norm;
  return gamma * (std::pow(grown, e.reaction) +
                  std::pow(grown, e.diffusion) * std::pow(1.0 / ((m - 1.0) * t), e.time));
}

SmoothingFit fit_smoothing_constants(std::span<const double> times,
                                     std::span<const double> linf, double u0_m_norm, double m,
                                     double p, int N, double growth_rate) {
  if (times.size() != linf.size())
    throw std::invalid_argument("fit_smoothing_constants: size mismatch");
  const auto e = smoothing_exponents(m, p, N);
  double c1 = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0))
      continue;
    const double shape = std::exp(growth_rate * times[i]) *
                         (std::pow(u0_m_norm, e.reaction) +
                          std::pow(u0_m_norm, e.diffusion) * std::pow(times[i], -e.time));
    if (shape > 0.0)
      c1 = std::max(c1, linf[i] / shape);
  }
  return {c1, growth_rate};
}

double stampacchia_exponent(int N, double l) {
  require_dimension(N);
  if (!(l > 0.5 * N))
    throw std::invalid_argument("stampacchia_exponent: need l > N/2");
  return 1.0 + 2.0 / N - inverse(l);
}

double stampacchia_bound(double C, double s, double l1_norm, double kbar) {
  if (!(s > 1.0))
    throw std::invalid_argument("stampacchia_bound: need s > 1");
  if (!(C >= 0.0 && l1_norm >= 0.0 && kbar >= 0.0))
    throw std::invalid_argument("stampacchia_bound: arguments must be >= 0");
  return std::pow(C, 1.0 / s) * s / (s - 1.0) * std::pow(l1_norm, 1.0 - 1.0 / s) + kbar;
}

double weighted_stampacchia_bound(double C, double s, double rho_total) {
  if (!(s > 1.0))
    throw std::invalid_argument("weighted_stampacchia_bound: need s > 1");
  return C * std::pow(s / (s - 1.0), s) * std::pow(rho_total, s - 1.0);
}

double default_auxiliary_exponent(int N, double m1, double m2) {
  const double top = std::min(m1, m2);
  if (std::isinf(top))
    throw std::invalid_argument("auxiliary exponent: no finite upper limit, pass l explicitly");
  if (!(top > 0.5 * N))
    throw std::invalid_argument("auxiliary exponent: need min(m1, m2) > N/2");
  return 0.5 * (0.5 * N + top);
}

namespace {

double resolve_l(const EllipticBoundInput &in) {
  require_dimension(in.N);
  if (!(in.m1 > 0.5 * in.N && in.m2 > 0.5 * in.N))
    throw std::invalid_argument("elliptic bound: need m1, m2 > N/2");
  if (!(in.C_s > 0.0))
    throw std::invalid_argument("elliptic bound: Sobolev constant must be > 0");
  const double l = in.l ? *in.l : default_auxiliary_exponent(in.N, in.m1, in.m2);
  if (!(l > 0.5 * in.N && l < std::min(in.m1, in.m2)))
    throw std::invalid_argument("elliptic bound: need N/2 < l < min(m1, m2)");
  return l;
}

} // namespace

double elliptic_linf_bound(const EllipticBoundInput &in, double v_l1, double kbar) {
  const double l = resolve_l(in);
  if (!(kbar > 0.0 && v_l1 >= 0.0))
    throw std::invalid_argument("elliptic_linf_bound: need kbar > 0 and ||v||_1 >= 0");
  const double s = stampacchia_exponent(in.N, l);
  const double lead = std::pow(s / (s - 1.0), s) / (in.C_s * in.C_s);
  auto coefficient = [&](double mi) {
    const double e = 1.0 / l - inverse(mi);
    return lead * std::pow(2.0 / kbar, e) * std::pow(v_l1, e);
  };
  const double sum = coefficient(in.m1) * in.f1_norm + coefficient(in.m2) * in.f2_norm;
  return std::pow(sum, 1.0 / s) * std::pow(v_l1, (s - 1.0) / s) + kbar;
}

double weighted_elliptic_bound(const EllipticBoundInput &in, double rho_total) {
  const double l = resolve_l(in);
  if (!(rho_total > 0.0))
    throw std::invalid_argument("weighted_elliptic_bound: weight mass must be > 0");
  const double s = stampacchia_exponent(in.N, l);
  const double lead = std::pow(s / (s - 1.0), s) / (in.C_s * in.C_s);
  auto coefficient = [&](double mi) {
    return lead * std::pow(rho_total, 2.0 / in.N - inverse(mi));
  };
  return coefficient(in.m1) * in.f1_norm + coefficient(in.m2) * in.f2_norm;
}

double absolute_bound(double t, double m, double C_abs) {
  if (!(t > 0.0))
    throw std::invalid_argument("absolute_bound: t must be > 0");
  if (!(m > 1.0))
    throw std::invalid_argument("absolute_bound: m must be > 1");
  return C_abs * (1.0 + std::pow(1.0 / ((m - 1.0) * t), 1.0 / (m - 1.0)));
}

double sharp_euclidean_sobolev_constant(int N) {
  require_dimension(N);
  const double n = N;
  return std::sqrt(n * (n - 2.0) / 4.0) * std::pow(unit_sphere_area(N + 1), 1.0 / n);
}

StampacchiaInstance::StampacchiaInstance(std::vector<double> values, std::vector<double> measures)
    : values_(std::move(values)), measures_(std::move(measures)) {
  if (values_.size() != measures_.size())
    throw std::invalid_argument("StampacchiaInstance: size mismatch");
  for (double w : measures_)
    if (!(w >= 0.0))
      throw std::invalid_argument("StampacchiaInstance: measures must be >= 0");
}

double StampacchiaInstance::g(double k) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    sum += measures_[i] * std::max(0.0, std::abs(values_[i]) - k);
  return sum;
}

double StampacchiaInstance::level_measure(double k) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (std::abs(values_[i]) > k)
      sum += measures_[i];
  return sum;
}

double StampacchiaInstance::l1_norm() const { return g(0.0); }

double StampacchiaInstance::linf_norm() const {
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

double StampacchiaInstance::total_measure() const {
  double sum = 0.0;
  for (double w : measures_)
    sum += w;
  return sum;
}

std::vector<double> StampacchiaInstance::levels() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (double v : values_)
    out.push_back(std::abs(v));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double StampacchiaInstance::minimal_constant(double s, double kbar) const {
  // Between consecutive levels mu(A_k) is constant and g decreases, so the
  // ratio peaks at kbar or just above a level.
  double best = 0.0;
  auto consider = [&](double k) {
    const double mu = level_measure(k);
    if (mu > 0.0)
      best = std::max(best, g(k) / std::pow(mu, s));
  };
  consider(kbar);
  for (double level : levels())
    if (level > kbar)
      consider(level);
  return best;
}

AronsonBenilanReport aronson_benilan_residual(const Solver &solver, const State &state) {
  if (!(state.t > 0.0))
    throw std::invalid_argument("aronson_benilan_residual: t must be > 0");
  const Grid &grid = solver.grid();
  const ModelParams &params = solver.params();
  const int n = grid.size();
  if (static_cast<int>(state.u.size()) != n)
    throw std::invalid_argument("aronson_benilan_residual: profile does not match grid");
  std::vector<double> power(n);
  for (int i = 0; i < n; ++i)
    power[i] = std::pow(state.u[i], params.m);
  const std::vector<double> lap = discrete_laplacian(grid, power);
  auto vol = grid.volumes();
  auto w = grid.measures();
  const double inv_mt = 1.0 / ((params.m - 1.0) * state.t);

  double scale = 0.0;
  double mass_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    scale = std::max(scale, (w[i] / vol[i]) * state.u[i] * inv_mt);
    mass_scale += w[i] * state.u[i] * inv_mt;
  }
  AronsonBenilanReport report{0.0, 0.0};
  if (!(scale > 0.0))
    return report;
  double worst = -kInfinity;
  double positive = 0.0;
  // The last cell touches the Dirichlet ghost and is left out. Cells where
  // u = 0 have -L(u^m) <= 0 and are skipped so the maximum shows the margin
  // on the positivity set.
  for (int i = 0; i + 1 < n; ++i) {
    if (!(state.u[i] > 0.0))
      continue;
    const double rho = w[i] / vol[i];
    const double res = -lap[i] / rho - params.reaction_term(state.u[i]) - state.u[i] * inv_mt;
    worst = std::max(worst, rho * res);
    positive += w[i] * std::max(0.0, res);
  }
  report.max_residual = std::isfinite(worst) ? worst / scale : 0.0;
  report.weighted_positive_part = positive / mass_scale;
  return report;
}

BoundConstants make_bound_constants(int N, double m, double p, double C_p, double C_s,
                                    std::optional<double> l) {
  require_exponents(m, p);
  require_dimension(N);
  BoundConstants b;
  b.N = N;
  b.m = m;
  b.p = p;
  b.C_p = C_p;
  b.C_s = C_s;
  b.l = l ? *l : kInfinity;
  b.s = stampacchia_exponent(N, b.l);
  b.critical_exponent = 2.0 * N / (N - 2.0);
  b.gamma = gamma_constants(m, p, N, C_s);
  return b;
}

} // namespace rdlab
