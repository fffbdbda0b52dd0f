#pragma once
//! \file barriers.hpp
//! Explicit subsolutions that grow without bound as t -> infinity.
//!
//! Weighted Euclidean space (rho with the inverse-square envelope):
//!
//!   w(r,t) = C (T+t)^alpha [1 - s(r)/a (T+t)^{-beta}]_+^{1/(m-1)}
//!
//! where s is the profile log r outside B_e glued C^1 to a quadratic inside.
//! The bracket is called F outside B_e and G inside.
//!
//! Model manifold: w(r,t) = C (tau+t)^alpha [1 - (r/a)(tau+t)^{-beta}]_+^{1/(m-1)}.

#include "rdlab/geometry.hpp"

#include <span>
#include <string>
#include <vector>

namespace rdlab {

inline constexpr double kEuler = 2.718281828459045;

enum class BarrierTarget { weighted_euclidean, manifold };

struct BarrierParams {
  double C = 10.0;
  double a = 1.0;
  double alpha = 0.5;
  double beta = 0.75;
  /// Time shift: T for the weighted construction, tau for the manifold one.
  double T = 16.0;
  BarrierTarget target = BarrierTarget::weighted_euclidean;

  /// Parameters with beta = (alpha(m-1)+1)/2.
  static BarrierParams make(double C, double a, double alpha, double T, double m,
                            BarrierTarget target = BarrierTarget::weighted_euclidean);
};

struct SProfile {
  double value;
  double derivative;
  double second_derivative;
};

/// log r for r >= e, (r^2 + e^2)/(2 e^2) for r < e.
SProfile s_profile(double r);

struct BarrierEnvelope {
  double t;
  double sigma;
  double delta;
  double gamma;
  double K;
  double F0;
  double phi_F0;
  double sigma0;
  double delta0;
};

/// K = c^{(m-1)/(p-1)} - c^{(p+m-2)/(p-1)}, c = (m-1)/(p+m-2).
double barrier_K(double m, double p);

/// sigma F - delta - gamma F^{(p+m-2)/(m-1)}.
double barrier_phi(double F, double sigma, double delta, double gamma, double m, double p);

BarrierEnvelope envelope(double t, const BarrierParams &bp, double m, double p,
                         const WeightEnvelope &env, int N);

struct ConditionResult {
  std::string name;
  bool pass;
  /// Signed slack; >= 0 means satisfied. Sampled conditions report the worst
  /// sample and the time at which it occurs.
  double margin;
  bool sampled = false;
  double worst_t = 0.0;
};

struct FeasibilityReport {
  std::vector<ConditionResult> conditions;
  bool pass() const;
  const ConditionResult *find(const std::string &name) const;
};

/// 0 together with log-spaced times on [1e-3, 1e4].
std::vector<double> default_barrier_time_grid(int count = 240);

//! Checks parameter relations, the threshold on C^{m-1}/a, the two outer
//! conditions and the inner-ball condition on every t in t_grid, and the
//! dominant-exponent comparison as t -> infinity. Failures are report
//! entries, never exceptions.
FeasibilityReport validate_barrier(const BarrierParams &bp, double m, double p,
                                   const WeightEnvelope &env, int N,
                                   std::span<const double> t_grid);

/// Weighted-Euclidean barrier value.
double subsolution_eval(double r, double t, const BarrierParams &bp, double m);

/// Bracket F (r >= e) or G (r < e).
double subsolution_bracket(double r, double t, const BarrierParams &bp);

/// w_t - (1/rho) Lap w^m - w^p in R^N from analytic radial derivatives.
/// Zero outside the support; throws std::domain_error when the bracket lies
/// in (0, 1e-6], where the derivatives blow up.
double subsolution_residual(double r, double t, const BarrierParams &bp, double m, double p,
                            const Weight &weight, int N);

/// Radial derivative of w^m from outside (+) or inside (-) the seam r = e.
double subsolution_power_derivative(double r, double t, const BarrierParams &bp, double m,
                                    bool outer_piece);

double manifold_barrier_eval(double r, double t, const BarrierParams &bp, double m);
double manifold_support_radius(double t, const BarrierParams &bp);

/// w_t - Lap w^m - w^p for the manifold barrier; same edge handling as the
/// weighted residual. r must be > 0 (the barrier has a cusp at the pole).
double manifold_barrier_residual(double r, double t, const BarrierParams &bp, double m, double p,
                                 const RadialGeometry &geom);

struct ResidualSweep {
  int samples = 0;
  int outer_samples = 0;
  int inner_samples = 0;
  double max_residual = 0.0;
  double max_outer = 0.0;
  double max_inner = 0.0;
  double worst_r = 0.0;
  double worst_t = 0.0;
};

/// Deterministic sweep: half the samples in the outer region with F drawn
/// from [lo, hi], half inside B_e with G in [lo, hi]; t uniform on
/// [0, t_max]. Points whose region cannot host the drawn bracket value are
/// redrawn.
ResidualSweep residual_sweep(const BarrierParams &bp, double m, double p, const Weight &weight,
                             int N, int samples, double t_max, double lo = 0.05, double hi = 0.95,
                             unsigned seed = 12345);

} // namespace rdlab
