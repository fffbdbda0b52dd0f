#pragma once
//! \file geometry.hpp
//! Rotationally symmetric model geometries, density weights and the radial
//! finite-volume grid built on top of them.
//!
//! A radial function v(r) on the model space has Laplacian v'' + (S'/S) v'
//! and measure dmu = S(r) dr, where S is the area of the geodesic sphere of
//! radius r. Everything downstream (solver, inequalities) only touches the
//! geometry through S and its logarithmic derivative.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdlab {

enum class GeometryKind { euclidean, hyperbolic };

class RadialGeometry {
public:
  static RadialGeometry euclidean(int dimension);
  /// Constant sectional curvature -kappa.
  static RadialGeometry hyperbolic(int dimension, double kappa);

  int dimension() const { return dimension_; }
  GeometryKind kind() const { return kind_; }
  double kappa() const { return kappa_; }

  /// S(r). Throws std::invalid_argument for r < 0.
  double sphere_area(double r) const;
  /// S'(r)/S(r). Throws std::invalid_argument for r <= 0.
  double drift(double r) const;
  /// Limit of S'/S as r -> infinity (0 for euclidean).
  double asymptotic_drift() const;

  std::string describe() const;

private:
  RadialGeometry(int dimension, GeometryKind kind, double kappa);

  int dimension_;
  GeometryKind kind_;
  double kappa_;
  double omega_;
};

/// Area of the unit (N-1)-sphere in R^N.
double unit_sphere_area(int dimension);

double sphere_area(const RadialGeometry &geom, double r);
double drift_coefficient(const RadialGeometry &geom, double r);

enum class WeightKind { unit, inverse_square, integrable };

//! Constants bounding 1/rho: k1 r^2 <= 1/rho <= k2 r^2 outside B_e (e the
//! seam radius) and rho1 <= 1/rho <= rho2 inside.
struct WeightEnvelope {
  double k1;
  double k2;
  double rho1;
  double rho2;
};

class Weight {
public:
  static Weight unit();
  /// rho(r) = e^2 / (r^2 + e^2); the default scale is Euler's number.
  static Weight inverse_square(double scale = 2.718281828459045);
  /// rho(r) = (1 + r^2)^(-a/2), integrable on R^N when a > N.
  static Weight integrable(double decay);

  WeightKind kind() const { return kind_; }
  double parameter() const { return param_; }

  double operator()(double r) const;
  double sup() const { return 1.0; }

  /// Envelope constants; only the inverse_square family has them.
  std::optional<WeightEnvelope> envelope() const;
  /// True when the weight has finite mass on R^N.
  bool integrable_in(int dimension) const;

  std::string describe() const;

private:
  Weight(WeightKind kind, double param) : kind_(kind), param_(param) {}
  WeightKind kind_;
  double param_;
};

double weight_eval(const Weight &w, double r);

/// Integral of rho over the ball of radius R in R^N (radial profile
/// omega_N r^{N-1}). R may be +infinity, in which case the weight must be
/// integrable.
double weight_total_mass(const Weight &w, int dimension, double R);

//! Uniform cell-centred grid on [0, R]. Cell i spans [face(i), face(i+1)].
class Grid {
public:
  Grid(const RadialGeometry &geom, const Weight &weight, double R, int cells);

  int size() const { return static_cast<int>(centers_.size()); }
  double radius() const { return radius_; }
  double spacing() const { return dr_; }
  const RadialGeometry &geometry() const { return geom_; }
  const Weight &weight() const { return weight_; }

  std::span<const double> centers() const { return centers_; }
  std::span<const double> faces() const { return faces_; }
  /// S at each face, size() + 1 entries.
  std::span<const double> face_areas() const { return face_areas_; }
  /// Geometric cell volumes, integral of S over the cell.
  std::span<const double> volumes() const { return volumes_; }
  /// Measure weights, integral of rho S over the cell.
  std::span<const double> measures() const { return measures_; }
  double center(int i) const { return centers_[i]; }

  /// Evaluates f at every cell centre.
  template <class F> std::vector<double> sample(F &&f) const {
    std::vector<double> out(centers_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = f(centers_[i]);
    return out;
  }

private:
  RadialGeometry geom_;
  Weight weight_;
  double radius_;
  double dr_;
  std::vector<double> centers_;
  std::vector<double> faces_;
  std::vector<double> face_areas_;
  std::vector<double> volumes_;
  std::vector<double> measures_;
};

/// 5-point Gauss-Legendre rule on [a, b].
template <class F> double gauss_legendre5(F &&f, double a, double b) {
  static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.9061798459386640};
  static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665,
                                  0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int k = 0; k < 5; ++k)
    sum += w[k] * f(mid + half * x[k]);
  return half * sum;
}

} // namespace rdlab
