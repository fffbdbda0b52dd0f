#include "rdlab/inequalities.hpp"

#include "rdlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdlab {

RayleighProblem RayleighProblem::build(const RadialGeometry &geom, const Weight &weight,
                                       double R, int cells) {
  RayleighProblem prob{Grid(geom, weight, R, cells), {}};
  const double dr = prob.grid.spacing();
  auto areas = prob.grid.face_areas();
  prob.conductance.assign(cells + 1, 0.0);
  for (int j = 1; j < cells; ++j)
    prob.conductance[j] = areas[j] / dr;
  prob.conductance[cells] = areas[cells] / (0.5 * dr);
  return prob;
}

double RayleighProblem::stiffness(std::span<const double> v) const {
  const std::size_t n = v.size();
  if (static_cast<int>(n) != grid.size())
    throw std::invalid_argument("stiffness: profile length does not match grid");
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const double d = v[j] - v[j - 1];
    sum += conductance[j] * d * d;
  }
  sum += conductance[n] * v[n - 1] * v[n - 1];
  return sum;
}

double RayleighProblem::mass(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != grid.size())
    throw std::invalid_argument("mass: profile length does not match grid");
  auto w = grid.measures();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    sum += w[i] * v[i] * v[i];
  return sum;
}

std::vector<double> RayleighProblem::apply_stiffness(std::span<const double> v) const {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double right = (i + 1 < n) ? v[i + 1] : 0.0;
    const double left = (i > 0) ? v[i - 1] : 0.0;
    out[i] = conductance[i] * (v[i] - left) - conductance[i + 1] * (right - v[i]);
  }
  return out;
}

double rayleigh_quotient(const RayleighProblem &prob, std::span<const double> v) {
  const double den = prob.mass(v);
  if (!(den > 0.0))
    throw std::invalid_argument("rayleigh_quotient: zero profile");
  return prob.stiffness(v) / den;
}

PoincareEstimate poincare_estimate(const RadialGeometry &geom, const Weight &weight, double R,
                                   int cells, double tol, int max_iterations) {
  if (cells < 100)
    throw std::invalid_argument("poincare_estimate: need at least 100 cells");
  const RayleighProblem prob = RayleighProblem::build(geom, weight, R, cells);
  const int n = cells;
  const auto &c = prob.conductance;
  auto w = prob.grid.measures();
  std::vector<double> lower(n), diag(n), upper(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = c[i] + c[i + 1];
    lower[i] = (i > 0) ? -c[i] : 0.0;
    upper[i] = (i + 1 < n) ? -c[i + 1] : 0.0;
  }

  std::vector<double> x(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    const double r = prob.grid.center(i) / R;
    x[i] = 1.0 - r * r;
  }
  auto normalize = [&](std::vector<double> &v) {
    const double norm = std::sqrt(prob.mass(v));
    for (double &e : v)
      e /= norm;
  };
  normalize(x);

  PoincareEstimate est{0.0, 0.0, 0, 0.0, {}};
  for (int it = 1; it <= max_iterations; ++it) {
    for (int i = 0; i < n; ++i)
      rhs[i] = w[i] * x[i];
    x = solve_tridiagonal(lower, diag, upper, rhs);
    normalize(x);
    const double lambda = prob.stiffness(x);
    const std::vector<double> kx = prob.apply_stiffness(x);
    // Residual measured in the M^{-1} norm against lambda ||x||_M = lambda.
    double res2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = kx[i] - lambda * w[i] * x[i];
      res2 += r * r / w[i];
    }
    est.lambda1 = lambda;
    est.iterations = it;
    est.residual = std::sqrt(res2) / lambda;
    if (est.residual <= tol) {
      est.C_p = std::sqrt(lambda);
      est.eigenvector = std::move(x);
      return est;
    }
  }
  std::ostringstream os;
  os << "poincare_estimate: residual " << est.residual << " above " << tol << " after "
     << max_iterations << " iterations";
  throw ConvergenceError(os.str());
}

double sobolev_ratio(const RayleighProblem &prob, std::span<const double> v) {
  const int N = prob.grid.geometry().dimension();
  const double crit = 2.0 * N / (N - 2.0);
  auto vol = prob.grid.volumes();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    sum += vol[i] * std::pow(std::abs(v[i]), crit);
  if (!(sum > 0.0))
    throw std::invalid_argument("sobolev_ratio: zero profile");
  return std::sqrt(prob.stiffness(v)) / std::pow(sum, 1.0 / crit);
}

SobolevEstimate sobolev_estimate(const RadialGeometry &geom, double R, int cells,
                                 const std::vector<RadialProfile> &family) {
  if (family.empty())
    throw std::invalid_argument("sobolev_estimate: empty family");
  const RayleighProblem prob = RayleighProblem::build(geom, Weight::unit(), R, cells);
  SobolevEstimate best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < family.size(); ++k) {
    const std::vector<double> v = prob.grid.sample(family[k]);
    const double ratio = sobolev_ratio(prob, v);
    if (ratio < best.value)
      best = {ratio, k};
  }
  return best;
}

std::vector<RadialProfile> aubin_talenti_family(int N, double R, std::span<const double> scales,
                                                double cut_factor) {
  std::vector<RadialProfile> out;
  const double power = -0.5 * (N - 2.0);
  for (double lambda : scales) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("aubin_talenti_family: scales must be > 0");
    auto phi = [lambda, power](double r) {
      return std::pow(1.0 + (r / lambda) * (r / lambda), power);
    };
    const double cut = std::min(R, cut_factor * lambda);
    const double edge = phi(cut);
    out.push_back([phi, edge](double r) { return std::max(0.0, phi(r) - edge); });
  }
  return out;
}

std::vector<double> log_scales(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1)
    throw std::invalid_argument("log_scales: bad range");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

WeightedSobolevCheck weighted_sobolev_consistency(const RadialGeometry &geom,
                                                  const Weight &weight, double R, int cells,
                                                  const RadialProfile &v) {
  const Grid grid(geom, weight, R, cells);
  const int N = geom.dimension();
  const double crit = 2.0 * N / (N - 2.0);
  const std::vector<double> vals = grid.sample(v);
  auto w = grid.measures();
  auto vol = grid.volumes();
  double weighted = 0.0;
  double plain = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = std::pow(std::abs(vals[i]), crit);
    weighted += w[i] * a;
    plain += vol[i] * a;
  }
  return {std::pow(weighted, 1.0 / crit),
          std::pow(weight.sup(), 1.0 / crit) * std::pow(plain, 1.0 / crit)};
}

} // namespace rdlab
