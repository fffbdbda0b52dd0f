#include "rdlab/solver.hpp"

#include "rdlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace rdlab {

double truncate(double x, double k) {
  if (x >= k)
    return k;
  if (x <= -k)
    return -k;
  return x;
}

void ModelParams::validate() const {
  if (!(m > 1.0))
    throw std::invalid_argument("ModelParams: m must be > 1");
  if (!(p > 1.0 && p < m))
    throw std::invalid_argument("ModelParams: need 1 < p < m");
  if (!(k_trunc > 0.0))
    throw std::invalid_argument("ModelParams: truncation level must be > 0");
  if (!(R > 0.0) || std::isinf(R))
    throw std::invalid_argument("ModelParams: R must be finite and > 0");
}

double ModelParams::reaction_term(double u) const {
  if (!reaction || u <= 0.0)
    return 0.0;
  const double up = std::pow(u, p);
  return std::isinf(k_trunc) ? up : truncate(up, k_trunc);
}

TimeSchedule TimeSchedule::log_spaced(double t_first, double t_end, int count) {
  if (!(t_first > 0.0 && t_end > t_first) || count < 2)
    throw std::invalid_argument("TimeSchedule::log_spaced: bad range");
  TimeSchedule s;
  s.checkpoints.resize(count);
  const double ratio = std::log(t_end / t_first) / (count - 1);
  for (int i = 0; i < count; ++i)
    s.checkpoints[i] = t_first * std::exp(ratio * i);
  s.checkpoints.back() = t_end;
  return s;
}

double TimeSchedule::next_dt(double t) const {
  return std::clamp(growth * t, dt_initial, dt_max);
}

namespace {

std::vector<double> face_conductance(const Grid &grid) {
  const int n = grid.size();
  const double dr = grid.spacing();
  auto areas = grid.face_areas();
  std::vector<double> c(n + 1);
  c[0] = 0.0;
  for (int j = 1; j < n; ++j)
    c[j] = areas[j] / dr;
  // Ghost value 0 sits on the boundary face, half a cell from the last centre.
  c[n] = areas[n] / (0.5 * dr);
  return c;
}

// [A v]_i = c_{i+1}(v_{i+1} - v_i) - c_i (v_i - v_{i-1}), with v_n = 0.
void apply_flux_operator(std::span<const double> c, std::span<const double> v,
                         std::span<double> out) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double right = (i + 1 < n) ? v[i + 1] : 0.0;
    const double left = (i > 0) ? v[i - 1] : 0.0;
    out[i] = c[i + 1] * (right - v[i]) - c[i] * (v[i] - left);
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

} // namespace

std::vector<double> discrete_laplacian(const Grid &grid, std::span<const double> vals) {
  if (static_cast<int>(vals.size()) != grid.size())
    throw std::invalid_argument("discrete_laplacian: profile length does not match grid");
  const auto c = face_conductance(grid);
  std::vector<double> out(vals.size());
  apply_flux_operator(c, vals, out);
  auto vol = grid.volumes();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] /= vol[i];
  return out;
}

std::vector<double> discrete_laplacian(const Grid &grid, const RadialGeometry &geom,
                                       std::span<const double> vals) {
  if (geom.kind() != grid.geometry().kind() || geom.dimension() != grid.geometry().dimension() ||
      geom.kappa() != grid.geometry().kappa())
    throw std::invalid_argument("discrete_laplacian: geometry does not match grid");
  return discrete_laplacian(grid, vals);
}

double lq_norm(const Grid &grid, std::span<const double> u, double q) {
  if (static_cast<int>(u.size()) != grid.size())
    throw std::invalid_argument("lq_norm: profile length does not match grid");
  if (std::isinf(q) && q > 0)
    return u.empty() ? 0.0 : std::max(0.0, *std::max_element(u.begin(), u.end()));
  if (!(q >= 1.0))
    throw std::invalid_argument("lq_norm: exponent must be >= 1");
  auto w = grid.measures();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    sum += w[i] * std::pow(std::abs(u[i]), q);
  return std::pow(sum, 1.0 / q);
}

double lq_norm(const Grid &grid, const Weight &weight, const State &state, double q) {
  if (weight.kind() != grid.weight().kind() || weight.parameter() != grid.weight().parameter())
    throw std::invalid_argument("lq_norm: weight does not match grid");
  return lq_norm(grid, state.u, q);
}

Solver::Solver(ModelParams params, int cells, SolverOptions options)
    : params_(std::move(params)), options_(options),
      grid_(params_.geom, params_.weight, params_.R, cells) {
  params_.validate();
  conductance_ = face_conductance(grid_);
}

State Solver::initial_state(const std::function<double(double)> &datum) const {
  State s;
  s.t = 0.0;
  s.u = grid_.sample(datum);
  for (double v : s.u)
    if (!(v >= 0.0))
      throw std::invalid_argument("initial datum must be nonnegative");
  return s;
}

NormRecord Solver::norms(const State &state) const {
  return NormRecord{state.t, lq_norm(grid_, state.u, 1.0), lq_norm(grid_, state.u, options_.q),
                    lq_norm(grid_, state.u, params_.m), lq_norm(grid_, state.u, kInfinity)};
}

std::optional<State> Solver::try_step(const State &state, double dt) const {
  const int n = grid_.size();
  const double m = params_.m;
  auto w = grid_.measures();
  std::span<const double> c = conductance_;

  std::vector<double> b(n);
  for (int i = 0; i < n; ++i)
    b[i] = state.u[i] + dt * params_.reaction_term(state.u[i]);

  std::vector<double> u = b, power(n), flux(n), res(n), lower(n), diag(n), upper(n), rhs(n),
                      trial(n), trial_res(n), dphi(n);

  auto residual = [&](std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < n; ++i)
      power[i] = std::pow(x[i], m);
    apply_flux_operator(c, power, flux);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = w[i] * (x[i] - b[i]) - dt * flux[i];
      worst = std::max(worst, std::abs(out[i]) / w[i]);
    }
    return worst;
  };

  double res_norm = residual(u, res);
  for (int it = 0; it < options_.max_newton; ++it) {
    for (int i = 0; i < n; ++i)
      dphi[i] = m * std::pow(u[i], m - 1.0) + options_.jacobian_regularization;
    for (int i = 0; i < n; ++i) {
      diag[i] = w[i] + dt * (c[i + 1] + c[i]) * dphi[i];
      lower[i] = (i > 0) ? -dt * c[i] * dphi[i - 1] : 0.0;
      upper[i] = (i + 1 < n) ? -dt * c[i + 1] * dphi[i + 1] : 0.0;
      rhs[i] = -res[i];
    }
    const std::vector<double> delta = solve_tridiagonal(lower, diag, upper, rhs);

    // Converged once the full projected Newton update is negligible.
    double change = 0.0;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      trial[i] = std::max(0.0, u[i] + delta[i]);
      change = std::max(change, std::abs(trial[i] - u[i]));
      scale = std::max(scale, trial[i]);
    }
    if (change <= options_.newton_tol * scale)
      return State{state.t + dt, std::move(trial)};

    double lambda = 1.0;
    double trial_norm = residual(trial, trial_res);
    for (int ls = 0; ls < 12 && trial_norm > res_norm; ++ls) {
      lambda *= 0.5;
      for (int i = 0; i < n; ++i)
        trial[i] = std::max(0.0, u[i] + lambda * delta[i]);
      trial_norm = residual(trial, trial_res);
    }
    if (!std::isfinite(trial_norm))
      return std::nullopt;
    u.swap(trial);
    res.swap(trial_res);
    res_norm = trial_norm;
  }
  return std::nullopt;
}

State Solver::step(const State &state, double dt) const {
  if (!(dt > 0.0))
    throw std::invalid_argument("step: dt must be > 0");
  if (auto next = try_step(state, dt))
    return std::move(*next);
  const double half = 0.5 * dt;
  if (half < options_.dt_min) {
    std::ostringstream os;
    os << "Newton iteration failed at t=" << state.t << " with dt=" << dt
       << " below dt_min=" << options_.dt_min << " (max u=" << max_abs(state.u) << ")";
    throw SolverError(os.str());
  }
  State mid = step(state, half);
  State out = step(mid, half);
  out.t = state.t + dt;
  return out;
}

Trajectory Solver::solve(const State &initial, const TimeSchedule &schedule,
                         const CheckpointObserver &observer) const {
  if (static_cast<int>(initial.u.size()) != grid_.size())
    throw std::invalid_argument("solve: initial profile does not match grid");
  for (double v : initial.u)
    if (!(v >= 0.0))
      throw std::invalid_argument("solve: initial datum must be nonnegative");
  Trajectory traj;
  traj.q = options_.q;
  traj.records.push_back(norms(initial));
  if (options_.store_profiles)
    traj.profiles.push_back(initial);

  State state = initial;
  double last = initial.t;
  for (double target : schedule.checkpoints) {
    if (!(target > last))
      throw std::invalid_argument("solve: checkpoints must be strictly increasing");
    while (state.t < target) {
      double dt = schedule.next_dt(state.t);
      const double remaining = target - state.t;
      if (dt >= remaining || remaining - dt < 1e-3 * dt)
        dt = remaining;
      state = step(state, dt);
      if (dt == remaining)
        state.t = target;
    }
    last = target;
    traj.records.push_back(norms(state));
    if (options_.store_profiles)
      traj.profiles.push_back(state);
    if (observer)
      observer(state);
  }
  return traj;
}

Trajectory solve(const ModelParams &params, int cells, const std::function<double(double)> &datum,
                 const TimeSchedule &schedule, SolverOptions options) {
  Solver solver(params, cells, options);
  return solver.solve(solver.initial_state(datum), schedule);
}

double MonotonicityReport::max_violation() const {
  return std::max({max_violation_k, max_violation_R, max_violation_h});
}

namespace {

// Largest amount by which the lower run exceeds the upper one, over the
// cells they share and every shared checkpoint.
double ordering_violation(const Trajectory &lower, const Trajectory &upper) {
  double worst = 0.0;
  const std::size_t frames = std::min(lower.profiles.size(), upper.profiles.size());
  for (std::size_t f = 0; f < frames; ++f) {
    const auto &a = lower.profiles[f].u;
    const auto &b = upper.profiles[f].u;
    const std::size_t cells = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < cells; ++i)
      worst = std::max(worst, a[i] - b[i]);
  }
  return worst;
}

} // namespace

MonotonicityReport ladder_check(const ModelParams &base, int cells_base,
                                const std::function<double(double)> &datum,
                                std::span<const double> k_seq, std::span<const double> R_seq,
                                std::span<const double> h_seq, const TimeSchedule &schedule,
                                SolverOptions options) {
  base.validate();
  options.store_profiles = true;
  const double dr = base.R / cells_base;
  auto check_increasing = [](std::span<const double> seq, const char *name) {
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (!(seq[i] >= seq[i - 1]))
        throw std::invalid_argument(std::string("ladder_check: ") + name +
                                    " sequence must be increasing");
  };
  check_increasing(k_seq, "k");
  check_increasing(R_seq, "R");
  check_increasing(h_seq, "h");

  auto run = [&](ModelParams params, double cap) {
    const int cells = static_cast<int>(std::lround(params.R / dr));
    Solver solver(params, cells, options);
    auto capped = [&](double r) { return std::min(datum(r), cap); };
    return solver.solve(solver.initial_state(capped), schedule);
  };

  // Rungs are independent solves; the datum must be safe to call concurrently.
  std::vector<std::future<Trajectory>> k_runs, R_runs, h_runs;
  for (double k : k_seq) {
    ModelParams p = base;
    p.k_trunc = k;
    k_runs.push_back(std::async(std::launch::async, run, p, kInfinity));
  }
  for (double R : R_seq) {
    ModelParams p = base;
    p.R = R;
    R_runs.push_back(std::async(std::launch::async, run, p, kInfinity));
  }
  for (double h : h_seq)
    h_runs.push_back(std::async(std::launch::async, run, base, h));

  MonotonicityReport report;
  auto compare = [&](std::vector<std::future<Trajectory>> &runs, std::span<const double> seq,
                     const char *axis, double &worst) {
    std::vector<Trajectory> done;
    for (auto &f : runs)
      done.push_back(f.get());
    for (std::size_t i = 1; i < done.size(); ++i) {
      const double v = ordering_violation(done[i - 1], done[i]);
      report.comparisons.push_back({axis, seq[i - 1], seq[i], v});
      worst = std::max(worst, v);
    }
  };
  compare(k_runs, k_seq, "k", report.max_violation_k);
  compare(R_runs, R_seq, "R", report.max_violation_R);
  compare(h_runs, h_seq, "h", report.max_violation_h);
  return report;
}

} // namespace rdlab
