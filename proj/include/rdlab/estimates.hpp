#pragma once
//! \file estimates.hpp
//! Closed-form constants and bounds for the reaction-diffusion problem,
//! together with small checkers (Young splitting, level-set bounds,
//! Aronson-Benilan residual) that the tests use as oracles against the
//! solver.
//!
//! Naming: C_p and C_s are the Poincare and Sobolev constants in
//! ||v||_2 <= ||grad v||_2 / C_p and ||v||_{2*} <= ||grad v||_2 / C_s.

#include "rdlab/solver.hpp"

#include <optional>
#include <span>
#include <vector>

namespace rdlab {

struct YoungSplit {
  double lhs;
  double rhs;
};

/// C(eps) = ((1/eps) (p-1)/(m-1))^((p-1)/(m-p)).
double young_constant(double eps, double m, double p);

/// lhs = x^(p+q-1), rhs = eps x^(m+q-1) + C(eps) x^q. lhs <= rhs for x >= 0.
YoungSplit young_split(double x, double eps, double m, double p, double q);

/// Upper limit 4m(q-1) C_p^2 / (m+q-1)^2 for the splitting parameter.
double lq_eps_threshold(double q, double m, double C_p);

/// Rate C(q) with d/dt ||u||_q^q <= C(q) ||u||_q^q, using eps at half the
/// admissible threshold. Independent of R and k.
double cq_constant(double q, double m, double p, double C_p);

struct GammaConstants {
  double gamma1;
  double gamma2;
  double gamma;
};

GammaConstants gamma_constants(double m, double p, int N, double C_s);

struct SmoothingExponents {
  double reaction;  ///< 2m / (2m + N(m-p))
  double diffusion; ///< 2m / (2m + N(m-1))
  double time;      ///< N / (2m + N(m-1))
};

SmoothingExponents smoothing_exponents(double m, double p, int N);

/// Gamma { [e^{Ct} A]^a + [e^{Ct} A]^b [1/((m-1)t)]^c } with A = ||u0||_m.
double smoothing_bound(double t, double u0_m_norm, double m, double p, int N, double gamma,
                       double C);

//! Diagnostic fit of c1 e^{c2 t}{A^a + A^b t^{-c}}: c2 is taken as the
//! growth rate and c1 is the smallest multiplier dominating every sample.
struct SmoothingFit {
  double c1;
  double c2;
};
SmoothingFit fit_smoothing_constants(std::span<const double> times,
                                     std::span<const double> linf, double u0_m_norm, double m,
                                     double p, int N, double growth_rate);

/// s = 1 + 2/N - 1/l.
double stampacchia_exponent(int N, double l);

/// C^{1/s} s/(s-1) ||v||_1^{1-1/s} + kbar.
double stampacchia_bound(double C, double s, double l1_norm, double kbar);

/// C (s/(s-1))^s ||rho||_1^{s-1}.
double weighted_stampacchia_bound(double C, double s, double rho_total);

/// Midpoint of (N/2, min(m1, m2)).
double default_auxiliary_exponent(int N, double m1, double m2);

struct EllipticBoundInput {
  double f1_norm;
  double f2_norm;
  double m1;
  double m2;
  int N;
  double C_s;
  std::optional<double> l;
};

/// {C1 ||f1|| + C2 ||f2||}^{1/s} ||v||_1^{(s-1)/s} + kbar, with
/// C_i = (s/(s-1))^s C_s^{-2} (2/kbar)^{1/l-1/m_i} ||v||_1^{1/l-1/m_i}.
double elliptic_linf_bound(const EllipticBoundInput &in, double v_l1, double kbar);

/// C1 ||f1||_rho + C2 ||f2||_rho with C_i = C_s^{-2} (s/(s-1))^s
/// ||rho||_1^{2/N - 1/m_i}.
double weighted_elliptic_bound(const EllipticBoundInput &in, double rho_total);

/// C {1 + [1/((m-1)t)]^{1/(m-1)}}.
double absolute_bound(double t, double m, double C_abs);

/// Best constant in the Euclidean Sobolev inequality, sqrt(N(N-2)/4) |S^N|^{1/N}.
double sharp_euclidean_sobolev_constant(int N);

//! Level-set data of a piecewise constant function: value v_i on a cell of
//! measure mu_i.
class StampacchiaInstance {
public:
  StampacchiaInstance(std::vector<double> values, std::vector<double> measures);

  /// g(k) = sum mu_i |G_k(v_i)|, G_k(v) = v - T_k(v).
  double g(double k) const;
  /// mu(A_k), A_k = {|v| > k}.
  double level_measure(double k) const;
  double l1_norm() const;
  double linf_norm() const;
  double total_measure() const;
  /// Smallest C with g(k) <= C mu(A_k)^s for every k >= kbar. Zero when
  /// |v| <= kbar everywhere.
  double minimal_constant(double s, double kbar) const;
  /// Sorted distinct levels |v_i|.
  std::vector<double> levels() const;

private:
  std::vector<double> values_;
  std::vector<double> measures_;
};

struct AronsonBenilanReport {
  /// max_i rho_i (-(1/rho) L u^m - u^p - u/((m-1)t))_i over interior cells
  /// with u_i > 0, divided by max_i rho_i u_i/((m-1)t).
  double max_residual;
  /// sum_i w_i (residual_i)_+ / sum_i w_i u_i/((m-1)t).
  double weighted_positive_part;
};

/// Throws std::invalid_argument for t <= 0.
AronsonBenilanReport aronson_benilan_residual(const Solver &solver, const State &state);

//! Every constant entering the growth and smoothing estimates for one
//! (N, m, p, C_p, C_s). With no auxiliary exponent the l -> infinity limit
//! is used, which is the one behind the Gamma constants.
struct BoundConstants {
  int N;
  double m;
  double p;
  double C_p;
  double C_s;
  double l;
  double s;
  double critical_exponent;
  GammaConstants gamma;

  double growth_rate(double q) const { return cq_constant(q, m, p, C_p); }
};

BoundConstants make_bound_constants(int N, double m, double p, double C_p, double C_s,
                                    std::optional<double> l = std::nullopt);

} // namespace rdlab
