#pragma once
//! \file inequalities.hpp
//! Discrete Poincare and Sobolev quotients over radial profiles vanishing at
//! r = R. The stiffness form uses the same face conductances as the solver,
//! so the discrete eigenvalue is exactly the one felt by the scheme.

#include "rdlab/geometry.hpp"

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace rdlab {

//! Quadratic forms on a radial Dirichlet grid:
//!   stiffness(v) = sum_j c_j (v_j - v_{j-1})^2, v_{-1} = v_0, v_n = 0,
//!   mass(v)      = sum_i w_i v_i^2,
//! with c_j = S(face_j)/dr (half a cell at r = R) and w_i the rho-weighted
//! cell measure. The gradient side is always unweighted.
struct RayleighProblem {
  Grid grid;
  std::vector<double> conductance;

  static RayleighProblem build(const RadialGeometry &geom, const Weight &weight, double R,
                               int cells);

  double stiffness(std::span<const double> v) const;
  double mass(std::span<const double> v) const;
  /// K v for the tridiagonal stiffness matrix.
  std::vector<double> apply_stiffness(std::span<const double> v) const;
};

/// stiffness(v) / mass(v). Throws for the zero profile.
double rayleigh_quotient(const RayleighProblem &prob, std::span<const double> v);

struct PoincareEstimate {
  double lambda1;
  double C_p;
  int iterations;
  /// ||K v - lambda M v|| / (lambda ||M v||) at exit.
  double residual;
  std::vector<double> eigenvector;
};

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Smallest generalized eigenvalue of K v = lambda M v by inverse power
/// iteration. Requires cells >= 100. Throws ConvergenceError when the
/// residual does not drop below tol within max_iterations.
PoincareEstimate poincare_estimate(const RadialGeometry &geom, const Weight &weight, double R,
                                   int cells, double tol = 1e-10, int max_iterations = 200000);

/// ||grad v||_2 / ||v||_{2*} with unweighted measures.
double sobolev_ratio(const RayleighProblem &prob, std::span<const double> v);

struct SobolevEstimate {
  double value;
  std::size_t best_index;
};

using RadialProfile = std::function<double(double)>;

inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

/// Minimum of the Sobolev ratio over a family of profiles sampled on a
/// unit-weight grid. This is an upper bound for any admissible C_s.
SobolevEstimate sobolev_estimate(const RadialGeometry &geom, double R, int cells,
                                 const std::vector<RadialProfile> &family);

/// (1 + (r/lambda)^2)^{-(N-2)/2} shifted down by its value at the cut-off
/// radius min(R, cut_factor * lambda) and clipped at 0, one profile per scale.
/// On hyperbolic models the cut-off must stay small: the polynomial tail
/// against exponential volume growth would otherwise dominate both norms.
std::vector<RadialProfile> aubin_talenti_family(int N, double R, std::span<const double> scales,
                                                double cut_factor = kNoCutoff);

/// log-spaced scales in [lo, hi].
std::vector<double> log_scales(double lo, double hi, int count);

struct WeightedSobolevCheck {
  double weighted_norm;  ///< ||v||_{2*, rho}
  double bound;          ///< ||rho||_inf^{1/2*} ||v||_{2*}
  bool holds() const { return weighted_norm <= bound * (1.0 + 1e-12); }
};

WeightedSobolevCheck weighted_sobolev_consistency(const RadialGeometry &geom,
                                                  const Weight &weight, double R, int cells,
                                                  const RadialProfile &v);

} // namespace rdlab
