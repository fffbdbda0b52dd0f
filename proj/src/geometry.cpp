#include "rdlab/geometry.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rdlab {

double unit_sphere_area(int dimension) {
  if (dimension < 1)
    throw std::invalid_argument("unit_sphere_area: dimension must be >= 1");
  const double half = 0.5 * dimension;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

RadialGeometry::RadialGeometry(int dimension, GeometryKind kind, double kappa)
    : dimension_(dimension), kind_(kind), kappa_(kappa),
      omega_(unit_sphere_area(dimension)) {
  if (dimension < 3)
    throw std::invalid_argument("RadialGeometry: dimension must be >= 3");
  if (kind == GeometryKind::hyperbolic && !(kappa > 0.0))
    throw std::invalid_argument("RadialGeometry: curvature magnitude must be > 0");
}

RadialGeometry RadialGeometry::euclidean(int dimension) {
  return RadialGeometry(dimension, GeometryKind::euclidean, 0.0);
}

RadialGeometry RadialGeometry::hyperbolic(int dimension, double kappa) {
  return RadialGeometry(dimension, GeometryKind::hyperbolic, kappa);
}

double RadialGeometry::sphere_area(double r) const {
  if (!(r >= 0.0))
    throw std::invalid_argument("sphere_area: radius must be >= 0");
  const int power = dimension_ - 1;
  if (kind_ == GeometryKind::euclidean)
    return omega_ * std::pow(r, power);
  const double sk = std::sqrt(kappa_);
  return omega_ * std::pow(std::sinh(sk * r) / sk, power);
}

double RadialGeometry::drift(double r) const {
  if (!(r > 0.0))
    throw std::invalid_argument("drift_coefficient: radius must be > 0");
  const double n1 = dimension_ - 1;
  if (kind_ == GeometryKind::euclidean)
    return n1 / r;
  const double sk = std::sqrt(kappa_);
  return n1 * sk / std::tanh(sk * r);
}

double RadialGeometry::asymptotic_drift() const {
  if (kind_ == GeometryKind::euclidean)
    return 0.0;
  return (dimension_ - 1) * std::sqrt(kappa_);
}

std::string RadialGeometry::describe() const {
  std::ostringstream os;
  if (kind_ == GeometryKind::euclidean)
    os << "euclidean(N=" << dimension_ << ")";
  else
    os << "hyperbolic(N=" << dimension_ << ", kappa=" << kappa_ << ")";
  return os.str();
}

double sphere_area(const RadialGeometry &geom, double r) { return geom.sphere_area(r); }

double drift_coefficient(const RadialGeometry &geom, double r) { return geom.drift(r); }

Weight Weight::unit() { return Weight(WeightKind::unit, 0.0); }

Weight Weight::inverse_square(double scale) {
  if (!(scale > 0.0))
    throw std::invalid_argument("inverse_square weight: scale must be > 0");
  return Weight(WeightKind::inverse_square, scale);
}

Weight Weight::integrable(double decay) {
  if (!(decay > 0.0))
    throw std::invalid_argument("integrable weight: decay exponent must be > 0");
  return Weight(WeightKind::integrable, decay);
}

double Weight::operator()(double r) const {
  switch (kind_) {
  case WeightKind::unit:
    return 1.0;
  case WeightKind::inverse_square: {
    const double e2 = param_ * param_;
    return e2 / (r * r + e2);
  }
  case WeightKind::integrable:
    return std::pow(1.0 + r * r, -0.5 * param_);
  }
  return 1.0;
}

std::optional<WeightEnvelope> Weight::envelope() const {
  if (kind_ != WeightKind::inverse_square)
    return std::nullopt;
  // 1/rho = (r^2 + e^2)/e^2, and r^2 + e^2 lies in [r^2, 2 r^2] for r >= e.
  const double e2 = param_ * param_;
  return WeightEnvelope{1.0 / e2, 2.0 / e2, 1.0, 2.0};
}

bool Weight::integrable_in(int dimension) const {
  return kind_ == WeightKind::integrable && param_ > dimension;
}

std::string Weight::describe() const {
  std::ostringstream os;
  switch (kind_) {
  case WeightKind::unit:
    os << "unit";
    break;
  case WeightKind::inverse_square:
    os << "inverse_square(e=" << param_ << ")";
    break;
  case WeightKind::integrable:
    os << "integrable(a=" << param_ << ")";
    break;
  }
  return os.str();
}

double weight_eval(const Weight &w, double r) { return w(r); }

double weight_total_mass(const Weight &w, int dimension, double R) {
  if (!(R >= 0.0))
    throw std::invalid_argument("weight_total_mass: radius must be >= 0");
  if (R == 0.0)
    return 0.0;
  const double omega = unit_sphere_area(dimension);
  auto integrand = [&](double r) { return w(r) * omega * std::pow(r, dimension - 1); };
  if (std::isinf(R)) {
    if (!w.integrable_in(dimension))
      throw std::invalid_argument("weight_total_mass: weight is not integrable on R^N");
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::gauss_kronrod;
    const double head = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-14);
    exp_sinh<double> tail_rule;
    const double tail = tail_rule.integrate(integrand, 1.0, std::numeric_limits<double>::infinity());
    return head + tail;
  }
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(integrand, 0.0, R, 20, 1e-14);
}

Grid::Grid(const RadialGeometry &geom, const Weight &weight, double R, int cells)
    : geom_(geom), weight_(weight), radius_(R) {
  if (!(R > 0.0))
    throw std::invalid_argument("Grid: radius must be > 0");
  if (cells < 2)
    throw std::invalid_argument("Grid: need at least two cells");
  dr_ = R / cells;
  faces_.resize(cells + 1);
  for (int i = 0; i <= cells; ++i)
    faces_[i] = i * dr_;
  faces_[cells] = R;
  centers_.resize(cells);
  face_areas_.resize(cells + 1);
  volumes_.resize(cells);
  measures_.resize(cells);
  for (int i = 0; i <= cells; ++i)
    face_areas_[i] = geom_.sphere_area(faces_[i]);
  for (int i = 0; i < cells; ++i) {
    const double a = faces_[i];
    const double b = faces_[i + 1];
    centers_[i] = 0.5 * (a + b);
    volumes_[i] = gauss_legendre5([&](double r) { return geom_.sphere_area(r); }, a, b);
    measures_[i] =
        gauss_legendre5([&](double r) { return weight_(r) * geom_.sphere_area(r); }, a, b);
  }
}

} // namespace rdlab
