#pragma once
//! \file solver.hpp
//! Finite-volume integration of rho u_t = Lap(u^m) + rho T_k(u^p) on a ball
//! B_R with homogeneous Dirichlet data, for radial profiles.
//!
//! Each step is implicit Euler in the diffusion and explicit in the
//! truncated reaction:
//!
//!   w_i (u_i - b_i) = dt [A(u^m)]_i,   b_i = u_old_i + dt T_k(u_old_i^p),
//!
//! where w_i is the rho-weighted cell measure and A the flux-form radial
//! operator. The nonlinear system is solved by Newton on the tridiagonal
//! Jacobian. The update is monotone in u_old, which is what makes the
//! truncation/radius/datum ladder comparisons hold at the discrete level.

#include "rdlab/geometry.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Clamp to [-k, k].
double truncate(double x, double k);

struct ModelParams {
  double m = 2.0;
  double p = 1.5;
  /// Truncation level of the reaction; +infinity means no truncation.
  double k_trunc = kInfinity;
  RadialGeometry geom = RadialGeometry::euclidean(3);
  Weight weight = Weight::unit();
  double R = 1.0;
  /// Switches the u^p term off (pure porous medium runs).
  bool reaction = true;

  /// Throws std::invalid_argument unless 1 < p < m, k > 0, R > 0.
  void validate() const;
  double reaction_term(double u) const;
};

struct State {
  double t = 0.0;
  std::vector<double> u;
};

struct NormRecord {
  double t;
  double l1;
  double lq;
  double lm;
  double linf;
};

struct Trajectory {
  double q = 2.0;
  std::vector<NormRecord> records;
  /// Profiles at t = 0 and at each checkpoint (when stored).
  std::vector<State> profiles;
};

//! Checkpoints plus step-size control. Steps follow dt = clamp(growth * t,
//! dt_initial, dt_max) and are shortened to land on each checkpoint, which
//! gives geometric refinement towards t = 0.
struct TimeSchedule {
  std::vector<double> checkpoints;
  double dt_initial = 1e-5;
  double dt_max = 0.01;
  double growth = 0.02;

  /// n log-spaced checkpoints in [t_first, t_end].
  static TimeSchedule log_spaced(double t_first, double t_end, int count);
  double next_dt(double t) const;
};

struct SolverOptions {
  double newton_tol = 1e-13;
  int max_newton = 60;
  double dt_min = 1e-12;
  double jacobian_regularization = 1e-12;
  /// Exponent of the configurable L^q column.
  double q = 2.0;
  bool store_profiles = true;
};

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flux-form discrete Laplacian with zero flux at r = 0 and a Dirichlet
/// ghost value 0 at r = R.
std::vector<double> discrete_laplacian(const Grid &grid, std::span<const double> vals);
std::vector<double> discrete_laplacian(const Grid &grid, const RadialGeometry &geom,
                                       std::span<const double> vals);

/// (sum_i w_i u_i^q)^(1/q) with the grid's rho-weighted measure; q = inf
/// gives max_i u_i. Throws for q < 1.
double lq_norm(const Grid &grid, std::span<const double> u, double q);
double lq_norm(const Grid &grid, const Weight &weight, const State &state, double q);

class Solver {
public:
  Solver(ModelParams params, int cells, SolverOptions options = {});

  const Grid &grid() const { return grid_; }
  const ModelParams &params() const { return params_; }
  const SolverOptions &options() const { return options_; }

  /// Samples a datum at the cell centres. Negative values are rejected.
  State initial_state(const std::function<double(double)> &datum) const;

  /// Advances by dt, halving internally on Newton failure.
  State step(const State &state, double dt) const;
  /// One implicit Euler step; empty when Newton does not converge.
  std::optional<State> try_step(const State &state, double dt) const;

  using CheckpointObserver = std::function<void(const State &)>;
  Trajectory solve(const State &initial, const TimeSchedule &schedule,
                   const CheckpointObserver &observer = {}) const;

  NormRecord norms(const State &state) const;

private:
  ModelParams params_;
  SolverOptions options_;
  Grid grid_;
  std::vector<double> conductance_;
};

Trajectory solve(const ModelParams &params, int cells,
                 const std::function<double(double)> &datum,
                 const TimeSchedule &schedule, SolverOptions options = {});

struct LadderComparison {
  std::string axis;
  double lower;
  double upper;
  double max_violation;
};

struct MonotonicityReport {
  std::vector<LadderComparison> comparisons;
  double max_violation_k = 0.0;
  double max_violation_R = 0.0;
  double max_violation_h = 0.0;
  double max_violation() const;
};

//! Runs the approximation ladder: increasing truncation levels, radii and
//! datum caps u0 ^ h. Adjacent runs are compared pointwise at every shared
//! checkpoint; radius comparisons are restricted to the smaller ball. All
//! runs share the grid spacing R_base / cells_base.
MonotonicityReport ladder_check(const ModelParams &base, int cells_base,
                                const std::function<double(double)> &datum,
                                std::span<const double> k_seq, std::span<const double> R_seq,
                                std::span<const double> h_seq, const TimeSchedule &schedule,
                                SolverOptions options = {});

} // namespace rdlab
