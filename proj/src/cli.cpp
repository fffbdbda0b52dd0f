#include "rdlab/cli.hpp"

#include "rdlab/estimates.hpp"
#include "rdlab/inequalities.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace rdlab::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKinds = {"simulate",       "verify-smoothing",      "verify-lq",
                                      "barrier-check",  "blowup-run",            "integrable-weight-run",
                                      "poincare",       "ladder-check"};

[[noreturn]] void fail(const std::string &msg) { throw ConfigError(msg); }

// Numbers, or the strings "inf"/"infinity" for an unbounded value.
double as_number(const json &v, const std::string &what) {
  if (v.is_number())
    return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity")
      return kInfinity;
  }
  fail(what + ": expected a number");
}

double number_at(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    fail(where + ": missing \"" + key + "\"");
  return as_number(obj.at(key), where + "." + key);
}

double number_or(const json &obj, const char *key, double fallback, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    return fallback;
  return as_number(obj.at(key), where + "." + key);
}

int int_at(const json &obj, const char *key, const std::string &where) {
  const double v = number_at(obj, key, where);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
    fail(where + "." + key + ": expected a positive integer");
  return static_cast<int>(v);
}

std::vector<double> number_list(const json &obj, const char *key, const std::string &where) {
  std::vector<double> out;
  if (!obj.is_object() || !obj.contains(key))
    return out;
  const json &arr = obj.at(key);
  if (!arr.is_array())
    fail(where + "." + key + ": expected an array");
  for (const auto &v : arr)
    out.push_back(as_number(v, where + "." + key));
  return out;
}

const json &object_at(const json &obj, const char *key, const std::string &where) {
  if (!obj.contains(key) || !obj.at(key).is_object())
    fail(where + ": missing object \"" + key + "\"");
  return obj.at(key);
}

RadialGeometry parse_geometry(const json &g) {
  if (!g.contains("kind") || !g.at("kind").is_string())
    fail("geometry: missing \"kind\"");
  const auto kind = g.at("kind").get<std::string>();
  const int dim = int_at(g, "dim", "geometry");
  try {
    if (kind == "euclidean")
      return RadialGeometry::euclidean(dim);
    if (kind == "hyperbolic")
      return RadialGeometry::hyperbolic(dim, number_at(g, "kappa", "geometry"));
  } catch (const std::invalid_argument &e) {
    fail(std::string("geometry: ") + e.what());
  }
  fail("geometry: unknown kind \"" + kind + "\"");
}

Weight parse_weight(const json &w) {
  if (!w.contains("kind") || !w.at("kind").is_string())
    fail("weight: missing \"kind\"");
  const auto kind = w.at("kind").get<std::string>();
  try {
    if (kind == "unit")
      return Weight::unit();
    if (kind == "inverse_square")
      return Weight::inverse_square(number_or(w, "scale", kEuler, "weight"));
    if (kind == "integrable")
      return Weight::integrable(number_at(w, "decay", "weight"));
  } catch (const std::invalid_argument &e) {
    fail(std::string("weight: ") + e.what());
  }
  fail("weight: unknown kind \"" + kind + "\"");
}

TimeSchedule parse_schedule(const json &s) {
  TimeSchedule out;
  if (s.contains("checkpoints")) {
    out.checkpoints = number_list(s, "checkpoints", "schedule");
  } else {
    try {
      out = TimeSchedule::log_spaced(number_at(s, "t_first", "schedule"),
                                     number_at(s, "t_end", "schedule"),
                                     int_at(s, "count", "schedule"));
    } catch (const std::invalid_argument &e) {
      fail(std::string("schedule: ") + e.what());
    }
  }
  if (out.checkpoints.empty())
    fail("schedule: no checkpoints");
  double last = 0.0;
  for (double t : out.checkpoints) {
    if (!(t > last) || std::isinf(t))
      fail("schedule: checkpoints must be finite, positive and strictly increasing");
    last = t;
  }
  out.dt_initial = number_or(s, "dt_initial", out.dt_initial, "schedule");
  out.dt_max = number_or(s, "dt_max", out.dt_max, "schedule");
  out.growth = number_or(s, "growth", out.growth, "schedule");
  if (!(out.dt_initial > 0.0 && out.dt_max >= out.dt_initial && out.growth >= 0.0))
    fail("schedule: need 0 < dt_initial <= dt_max and growth >= 0");
  return out;
}

BarrierParams parse_barrier(const json &b, double m) {
  BarrierParams bp;
  bp.C = number_at(b, "C", "barrier");
  bp.a = number_at(b, "a", "barrier");
  bp.alpha = number_at(b, "alpha", "barrier");
  const std::string target = b.value("target", std::string("weighted_euclidean"));
  if (target == "weighted_euclidean")
    bp.target = BarrierTarget::weighted_euclidean;
  else if (target == "manifold")
    bp.target = BarrierTarget::manifold;
  else
    fail("barrier: unknown target \"" + target + "\"");
  const char *shift = bp.target == BarrierTarget::manifold ? "tau" : "T";
  bp.T = number_at(b, shift, "barrier");
  bp.beta = b.contains("beta") ? number_at(b, "beta", "barrier")
                               : 0.5 * (bp.alpha * (m - 1.0) + 1.0);
  if (!(bp.C > 0.0 && bp.a > 0.0 && bp.T > 0.0))
    fail("barrier: C, a and the time shift must be > 0");
  return bp;
}

DatumSpec parse_datum(const json &d) {
  DatumSpec out;
  if (!d.contains("kind") || !d.at("kind").is_string())
    fail("datum: missing \"kind\"");
  out.kind = d.at("kind").get<std::string>();
  if (out.kind == "bump") {
    out.center = number_or(d, "center", 0.0, "datum");
    out.width = number_at(d, "width", "datum");
    out.height = number_at(d, "height", "datum");
    if (!(out.width > 0.0 && out.height >= 0.0))
      fail("datum: need width > 0 and height >= 0");
  } else if (out.kind == "barrier" || out.kind == "manifold_barrier") {
    out.lift = number_or(d, "lift", 1.0, "datum");
    if (!(out.lift >= 1.0))
      fail("datum: lift must be >= 1 so the datum dominates the barrier");
  } else if (out.kind != "zero") {
    fail("datum: unknown kind \"" + out.kind + "\"");
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Check make_check(std::string name, double value, double bound, bool pass, std::string detail = {}) {
  return Check{std::move(name), pass, value, bound, std::move(detail)};
}

// Plain-number JSON value; infinities are written as strings.
json jnum(double v) {
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  if (std::isnan(v))
    return nullptr;
  return v;
}

} // namespace

Tolerances apply_overrides(Tolerances base, const std::string &spec) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      fail("tolerance override \"" + item + "\": expected name=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    char *end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !(value >= 0.0))
      fail("tolerance override \"" + item + "\": bad value");
    if (key == "lq_slack")
      base.lq_slack = value;
    else if (key == "smoothing_slack")
      base.smoothing_slack = value;
    else if (key == "slope_slack")
      base.slope_slack = value;
    else if (key == "barrier_slack")
      base.barrier_slack = value;
    else if (key == "growth_factor")
      base.growth_factor = value;
    else if (key == "plateau_factor")
      base.plateau_factor = value;
    else if (key == "ladder")
      base.ladder = value;
    else if (key == "residual")
      base.residual = value;
    else if (key == "ab")
      base.ab = value;
    else
      fail("tolerance override: unknown name \"" + key + "\"");
  }
  return base;
}

Tolerances default_tolerances() {
  Tolerances t;
  if (const char *env = std::getenv("RDLAB_TOL"))
    t = apply_overrides(t, env);
  return t;
}

namespace {

Tolerances parse_tolerances(const json &j, Tolerances base) {
  if (!j.contains("tolerances"))
    return base;
  const json &t = j.at("tolerances");
  if (!t.is_object())
    fail("tolerances: expected an object");
  std::string spec;
  for (auto it = t.begin(); it != t.end(); ++it)
    spec += it.key() + "=" + fmt(as_number(it.value(), "tolerances." + it.key())) + ",";
  return apply_overrides(base, spec);
}

} // namespace

ScenarioConfig parse_scenario(const json &j, const Tolerances &base) {
  if (!j.is_object())
    fail("scenario: expected an object");
  ScenarioConfig cfg;
  cfg.source = j;
  if (!j.contains("scenario") || !j.at("scenario").is_string())
    fail("scenario: missing \"scenario\" kind");
  cfg.kind = j.at("scenario").get<std::string>();
  if (!kKinds.count(cfg.kind))
    fail("scenario: unknown kind \"" + cfg.kind + "\"");
  cfg.name = j.value("name", cfg.kind);
  cfg.tol = parse_tolerances(j, base);

  if (cfg.kind == "poincare") {
    cfg.model.geom = parse_geometry(object_at(j, "geometry", "scenario"));
    cfg.model.weight = j.contains("weight") ? parse_weight(j.at("weight")) : Weight::unit();
    const json &model = object_at(j, "model", "scenario");
    cfg.model.R = number_at(model, "R", "model");
    cfg.cells = int_at(model, "cells", "model");
    if (!(cfg.model.R > 0.0) || std::isinf(cfg.model.R))
      fail("model.R must be finite and > 0");
    if (cfg.cells < 100)
      fail("model.cells must be >= 100 for an eigenvalue estimate");
    return cfg;
  }

  const json &model = object_at(j, "model", "scenario");
  cfg.model.m = number_at(model, "m", "model");
  cfg.model.p = number_at(model, "p", "model");
  if (!(cfg.model.m > 1.0 && cfg.model.p > 1.0 && cfg.model.p < cfg.model.m))
    fail("model: need 1 < p < m");
  cfg.model.geom = parse_geometry(object_at(j, "geometry", "scenario"));
  cfg.model.weight = j.contains("weight") ? parse_weight(j.at("weight")) : Weight::unit();
  if (j.contains("barrier"))
    cfg.barrier = parse_barrier(j.at("barrier"), cfg.model.m);

  if (cfg.kind == "barrier-check") {
    if (!cfg.barrier)
      fail("barrier-check: missing \"barrier\"");
    if (cfg.barrier->target == BarrierTarget::weighted_euclidean &&
        !cfg.model.weight.envelope())
      fail("barrier-check: the weighted construction needs an inverse_square weight");
    if (j.contains("sweep")) {
      const json &s = j.at("sweep");
      cfg.sweep_samples = int_at(s, "samples", "sweep");
      cfg.sweep_t_max = number_at(s, "t_max", "sweep");
    }
    return cfg;
  }

  cfg.model.R = number_at(model, "R", "model");
  cfg.cells = int_at(model, "cells", "model");
  cfg.model.k_trunc = number_or(model, "k_trunc", kInfinity, "model");
  if (model.contains("reaction")) {
    if (!model.at("reaction").is_boolean())
      fail("model.reaction: expected a boolean");
    cfg.model.reaction = model.at("reaction").get<bool>();
  }
  cfg.options.q = number_or(model, "q", 2.0, "model");
  if (!(cfg.options.q >= 1.0))
    fail("model.q must be >= 1");
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument &e) {
    fail(std::string("model: ") + e.what());
  }
  if (cfg.cells < 2)
    fail("model.cells must be >= 2");

  cfg.datum = parse_datum(object_at(j, "datum", "scenario"));
  if (cfg.datum.kind == "bump" && cfg.datum.center + cfg.datum.width > cfg.model.R)
    fail("datum: bump support must lie inside B_R");
  if ((cfg.datum.kind == "barrier" || cfg.datum.kind == "manifold_barrier") && !cfg.barrier)
    fail("datum: barrier datum needs a \"barrier\" block");
  cfg.schedule = parse_schedule(object_at(j, "schedule", "scenario"));

  if (j.contains("constants")) {
    const json &c = j.at("constants");
    if (c.contains("C_p"))
      cfg.constants.C_p = number_at(c, "C_p", "constants");
    if (c.contains("C_s"))
      cfg.constants.C_s = number_at(c, "C_s", "constants");
    if (c.contains("poincare_cells"))
      cfg.constants.poincare_cells = int_at(c, "poincare_cells", "constants");
    if (c.contains("sobolev_cells"))
      cfg.constants.sobolev_cells = int_at(c, "sobolev_cells", "constants");
  }

  if (cfg.kind == "verify-smoothing" && j.contains("smoothing")) {
    const json &s = j.at("smoothing");
    cfg.smoothing_t_min = number_or(s, "t_min", cfg.smoothing_t_min, "smoothing");
    cfg.slope_t_max = number_or(s, "slope_t_max", cfg.slope_t_max, "smoothing");
  }
  if (cfg.kind == "blowup-run") {
    if (!cfg.barrier)
      fail("blowup-run: missing \"barrier\"");
    if (j.contains("growth")) {
      const json &g = j.at("growth");
      cfg.growth_t_early = number_at(g, "t_early", "growth");
      cfg.growth_t_late = number_at(g, "t_late", "growth");
    } else {
      cfg.growth_t_early = cfg.growth_t_late = 0.0;
    }
  }
  if (cfg.kind == "integrable-weight-run" && j.contains("plateau")) {
    const json &p = j.at("plateau");
    cfg.plateau_start = number_or(p, "t_start", cfg.plateau_start, "plateau");
    cfg.plateau_early_end = number_or(p, "t_early_end", cfg.plateau_early_end, "plateau");
  }
  if (cfg.kind == "ladder-check") {
    const json &l = object_at(j, "ladder", "scenario");
    cfg.ladder_k = number_list(l, "k", "ladder");
    cfg.ladder_R = number_list(l, "R", "ladder");
    cfg.ladder_h = number_list(l, "h", "ladder");
  }
  return cfg;
}

std::vector<ScenarioConfig> parse_config(const json &j, const Tolerances &base) {
  std::vector<ScenarioConfig> out;
  if (j.is_object() && j.contains("scenarios")) {
    const json &arr = j.at("scenarios");
    if (!arr.is_array() || arr.empty())
      fail("scenarios: expected a non-empty array");
    const Tolerances shared = parse_tolerances(j, base);
    std::set<std::string> names;
    for (const auto &s : arr) {
      out.push_back(parse_scenario(s, shared));
      if (!names.insert(out.back().name).second)
        fail("scenarios: duplicate name \"" + out.back().name + "\"");
    }
  } else {
    out.push_back(parse_scenario(j, base));
  }
  return out;
}

bool RunReport::pass() const {
  if (solver_failed || !errors.empty())
    return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
}

int RunReport::exit_code() const { return pass() ? kExitPass : kExitViolation; }

namespace {

std::function<double(double)> make_datum(const ScenarioConfig &cfg) {
  const DatumSpec d = cfg.datum;
  if (d.kind == "bump") {
    return [d](double r) {
      const double x = (r - d.center) / d.width;
      if (std::abs(x) >= 1.0)
        return 0.0;
      const double b = 1.0 - x * x;
      return d.height * b * b;
    };
  }
  if (d.kind == "barrier") {
    const BarrierParams bp = *cfg.barrier;
    const double m = cfg.model.m;
    return [bp, m, d](double r) { return d.lift * subsolution_eval(r, 0.0, bp, m); };
  }
  if (d.kind == "manifold_barrier") {
    const BarrierParams bp = *cfg.barrier;
    const double m = cfg.model.m;
    return [bp, m, d](double r) { return d.lift * manifold_barrier_eval(r, 0.0, bp, m); };
  }
  return [](double) { return 0.0; };
}

TrajectoryRow row_from(const NormRecord &r) {
  return TrajectoryRow{r.t, r.l1, r.lm, r.lq, r.linf, std::nullopt, std::nullopt, std::nullopt};
}

// C_p and C_s either from the config or estimated on the scenario's domain.
std::pair<double, double> resolve_constants(const ScenarioConfig &cfg, RunReport &rep) {
  double C_p = 0.0;
  double C_s = 0.0;
  if (cfg.constants.C_p) {
    C_p = *cfg.constants.C_p;
    rep.constants["C_p_source"] = "config";
  } else {
    const auto est = poincare_estimate(cfg.model.geom, cfg.model.weight, cfg.model.R,
                                       std::max(100, cfg.constants.poincare_cells));
    C_p = est.C_p;
    rep.constants["lambda1"] = est.lambda1;
    rep.constants["C_p_source"] = "poincare_estimate";
  }
  if (cfg.constants.C_s) {
    C_s = *cfg.constants.C_s;
    rep.constants["C_s_source"] = "config";
  } else {
    const auto scales = log_scales(0.01, 0.5, 30);
    const auto family = aubin_talenti_family(cfg.model.geom.dimension(), cfg.model.R, scales, 40.0);
    C_s = sobolev_estimate(cfg.model.geom, cfg.model.R, cfg.constants.sobolev_cells, family).value;
    rep.constants["C_s_source"] = "sobolev_estimate";
  }
  rep.constants["C_p"] = C_p;
  rep.constants["C_s"] = C_s;
  return {C_p, C_s};
}

Trajectory run_solver(const ScenarioConfig &cfg, const Solver::CheckpointObserver &observer = {}) {
  Solver solver(cfg.model, cfg.cells, cfg.options);
  return solver.solve(solver.initial_state(make_datum(cfg)), cfg.schedule, observer);
}

void add_nonnegativity(RunReport &rep, const Trajectory &traj) {
  double worst = 0.0;
  bool finite = true;
  for (const auto &s : traj.profiles)
    for (double v : s.u) {
      worst = std::min(worst, v);
      finite = finite && std::isfinite(v);
    }
  rep.checks.push_back(make_check("nonnegative", worst, 0.0, worst >= 0.0));
  rep.checks.push_back(make_check("finite", finite ? 1.0 : 0.0, 1.0, finite));
}

// Value of the recorded L-infinity norm at time t (must be a checkpoint).
double linf_at(const std::vector<TrajectoryRow> &rows, double t) {
  for (const auto &r : rows)
    if (std::abs(r.t - t) <= 1e-12 * std::max(1.0, t))
      return r.linf;
  fail("requested time " + fmt(t) + " is not a checkpoint");
}

void scenario_simulate(const ScenarioConfig &cfg, RunReport &rep) {
  const Trajectory traj = run_solver(cfg);
  for (const auto &r : traj.records)
    rep.rows.push_back(row_from(r));
  add_nonnegativity(rep, traj);
}

void scenario_verify_lq(const ScenarioConfig &cfg, RunReport &rep) {
  const auto [C_p, C_s] = resolve_constants(cfg, rep);
  (void)C_s;
  const double m = cfg.model.m;
  const double p = cfg.model.p;
  const double q = cfg.options.q;
  const double Cq = cq_constant(q, m, p, C_p);
  const double Cm = cq_constant(m, m, p, C_p);
  rep.constants["C_q"] = Cq;
  rep.constants["C_m"] = Cm;
  rep.constants["q"] = q;
  const Trajectory traj = run_solver(cfg);
  const NormRecord &r0 = traj.records.front();
  double worst_q = 0.0;
  double worst_m = 0.0;
  for (const auto &r : traj.records) {
    TrajectoryRow row = row_from(r);
    const double bq = std::exp(Cq * r.t) * r0.lq;
    const double bm = std::exp(Cm * r.t) * r0.lm;
    row.lq_bound = bq;
    if (bq > 0.0)
      worst_q = std::max(worst_q, r.lq / bq);
    else if (r.lq > 0.0)
      worst_q = kInfinity;
    if (bm > 0.0)
      worst_m = std::max(worst_m, r.lm / bm);
    else if (r.lm > 0.0)
      worst_m = kInfinity;
    rep.rows.push_back(row);
  }
  const double limit = 1.0 + cfg.tol.lq_slack;
  rep.checks.push_back(make_check("lq_growth_q", worst_q, limit, worst_q <= limit,
                                  "max_t ||u(t)||_q / (exp(C(q) t) ||u0||_q)"));
  rep.checks.push_back(make_check("lq_growth_m", worst_m, limit, worst_m <= limit,
                                  "max_t ||u(t)||_m / (exp(C(m) t) ||u0||_m)"));
  add_nonnegativity(rep, traj);
}

void scenario_verify_smoothing(const ScenarioConfig &cfg, RunReport &rep) {
  const auto [C_p, C_s] = resolve_constants(cfg, rep);
  const double m = cfg.model.m;
  const double p = cfg.model.p;
  const int N = cfg.model.geom.dimension();
  const double Cm = cq_constant(m, m, p, C_p);
  const GammaConstants g = gamma_constants(m, p, N, C_s);
  rep.constants["C_m"] = Cm;
  rep.constants["gamma1"] = g.gamma1;
  rep.constants["gamma2"] = g.gamma2;
  rep.constants["gamma"] = g.gamma;
  const Trajectory traj = run_solver(cfg);
  const double A = traj.records.front().lm;
  rep.constants["u0_m_norm"] = A;

  double worst = 0.0;
  std::vector<double> ts, linf;
  for (const auto &r : traj.records) {
    TrajectoryRow row = row_from(r);
    if (r.t > 0.0) {
      const double b = smoothing_bound(r.t, A, m, p, N, g.gamma, Cm);
      row.smoothing_bound = b;
      if (r.t >= cfg.smoothing_t_min * (1.0 - 1e-12)) {
        worst = std::max(worst, b > 0.0 ? r.linf / b : (r.linf > 0.0 ? kInfinity : 0.0));
        if (r.t <= cfg.slope_t_max * (1.0 + 1e-12)) {
          ts.push_back(r.t);
          linf.push_back(r.linf);
        }
      }
    }
    rep.rows.push_back(row);
  }
  const double limit = 1.0 + cfg.tol.smoothing_slack;
  rep.checks.push_back(make_check("smoothing_ratio", worst, limit, worst <= limit,
                                  "max_t ||u(t)||_inf / smoothing_bound(t)"));

  const SmoothingExponents e = smoothing_exponents(m, p, N);
  const double floor = -e.time - cfg.tol.slope_slack;
  if (ts.size() >= 2) {
    double slope = kInfinity;
    for (std::size_t i = 1; i < ts.size(); ++i)
      if (linf[i] > 0.0 && linf[i - 1] > 0.0)
        slope = std::min(slope, std::log(linf[i] / linf[i - 1]) / std::log(ts[i] / ts[i - 1]));
    rep.checks.push_back(make_check("early_slope", slope, floor, slope >= floor,
                                    "min consecutive log-log slope of ||u||_inf on [t_min, slope_t_max]"));
  } else {
    rep.errors.push_back("early_slope: fewer than two checkpoints in [t_min, slope_t_max]");
  }
  const SmoothingFit fit =
      fit_smoothing_constants(ts, linf, A, m, p, N, Cm);
  rep.constants["fitted_c1"] = fit.c1;
  rep.constants["fitted_c2"] = fit.c2;
  add_nonnegativity(rep, traj);
}

void scenario_barrier_check(const ScenarioConfig &cfg, RunReport &rep) {
  const BarrierParams &bp = *cfg.barrier;
  const double m = cfg.model.m;
  const double p = cfg.model.p;
  const int N = cfg.model.geom.dimension();
  rep.constants["beta"] = bp.beta;
  rep.constants["K"] = barrier_K(m, p);
  if (bp.target == BarrierTarget::manifold) {
    rep.feasibility = validate_barrier(bp, m, p, WeightEnvelope{1, 1, 1, 1}, N, {});
    // Manifold barrier: analytic residual on the smooth part of the support.
    double worst = -kInfinity;
    const int per_t = std::max(1, cfg.sweep_samples / 50);
    for (int k = 0; k < 50; ++k) {
      const double t = cfg.sweep_t_max * k / 49.0;
      const double edge = manifold_support_radius(t, bp);
      for (int i = 0; i < per_t; ++i) {
        const double B = 0.05 + 0.9 * (i + 0.5) / per_t;
        worst = std::max(worst, manifold_barrier_residual(edge * (1.0 - B), t, bp, m, p,
                                                          cfg.model.geom));
      }
    }
    rep.checks.push_back(make_check("residual", worst, cfg.tol.residual, worst <= cfg.tol.residual,
                                    "max residual with bracket in [0.05, 0.95]"));
  } else {
    const WeightEnvelope env = *cfg.model.weight.envelope();
    rep.constants["k1"] = env.k1;
    rep.constants["k2"] = env.k2;
    rep.constants["rho1"] = env.rho1;
    rep.constants["rho2"] = env.rho2;
    const auto grid = default_barrier_time_grid();
    rep.feasibility = validate_barrier(bp, m, p, env, N, grid);
    const ResidualSweep sw =
        residual_sweep(bp, m, p, cfg.model.weight, N, cfg.sweep_samples, cfg.sweep_t_max);
    rep.constants["sweep_samples"] = sw.samples;
    rep.constants["sweep_outer_samples"] = sw.outer_samples;
    rep.constants["sweep_inner_samples"] = sw.inner_samples;
    rep.constants["sweep_max_outer"] = jnum(sw.max_outer);
    rep.constants["sweep_max_inner"] = jnum(sw.max_inner);
    rep.constants["sweep_worst_r"] = sw.worst_r;
    rep.constants["sweep_worst_t"] = sw.worst_t;
    rep.checks.push_back(make_check("residual", sw.max_residual, cfg.tol.residual,
                                    sw.max_residual <= cfg.tol.residual,
                                    "max residual with F, G in [0.05, 0.95]"));
  }
  for (const auto &c : rep.feasibility.conditions)
    rep.checks.push_back(make_check("feasibility:" + c.name, c.margin, 0.0, c.pass));
}

void scenario_blowup(const ScenarioConfig &cfg, RunReport &rep) {
  const BarrierParams &bp = *cfg.barrier;
  const double m = cfg.model.m;
  const bool manifold = bp.target == BarrierTarget::manifold;
  auto barrier = [&](double r, double t) {
    return manifold ? manifold_barrier_eval(r, t, bp, m) : subsolution_eval(r, t, bp, m);
  };
  Solver solver(cfg.model, cfg.cells, cfg.options);
  const auto centers = solver.grid().centers();
  std::vector<double> gaps;
  std::vector<double> supports;
  std::vector<double> peaks;
  auto gap_of = [&](const State &s) {
    double sup = 0.0;
    for (double r : centers)
      sup = std::max(sup, barrier(r, s.t));
    double gap = kInfinity;
    double support = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double b = barrier(centers[i], s.t);
      if (b > 0.0)
        support = solver.grid().faces()[i + 1];
      gap = std::min(gap, (s.u[i] - b) / sup);
    }
    supports.push_back(support);
    peaks.push_back(barrier(0.0, s.t));
    return gap;
  };
  const State init = solver.initial_state(make_datum(cfg));
  gaps.push_back(gap_of(init));
  const Trajectory traj = solver.solve(init, cfg.schedule, [&](const State &s) {
    gaps.push_back(gap_of(s));
  });
  double worst = kInfinity;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    TrajectoryRow row = row_from(traj.records[i]);
    row.barrier_min_ratio = gaps[i];
    worst = std::min(worst, gaps[i]);
    rep.rows.push_back(row);
  }
  const double floor = -cfg.tol.barrier_slack;
  rep.checks.push_back(make_check("barrier_comparison", worst, floor, worst >= floor,
                                  "min_t min_i (u_i - w_i) / max_i w_i"));
  if (cfg.growth_t_late > 0.0) {
    const double early = linf_at(rep.rows, cfg.growth_t_early);
    const double late = linf_at(rep.rows, cfg.growth_t_late);
    const double ratio = early > 0.0 ? late / early : 0.0;
    rep.checks.push_back(make_check("linf_growth", ratio, cfg.tol.growth_factor,
                                    ratio >= cfg.tol.growth_factor,
                                    "||u(t_late)||_inf / ||u(t_early)||_inf"));
  }
  // Barrier support and peak against the time shift over the last decade.
  const double t_end = cfg.schedule.checkpoints.back();
  std::size_t first = 0;
  for (std::size_t i = 0; i < traj.records.size(); ++i)
    if (traj.records[i].t <= t_end / 10.0 * (1.0 + 1e-12))
      first = i;
  const std::size_t last = traj.records.size() - 1;
  bool monotone = true;
  for (std::size_t i = 1; i < supports.size(); ++i)
    monotone = monotone && supports[i] >= supports[i - 1] && peaks[i] >= peaks[i - 1];
  rep.checks.push_back(make_check("barrier_monotone", monotone ? 1.0 : 0.0, 1.0, monotone));
  if (first < last && traj.records[first].t > 0.0) {
    const double span = std::log((bp.T + traj.records[last].t) / (bp.T + traj.records[first].t));
    const double e_peak = std::log(peaks[last] / peaks[first]) / span;
    rep.checks.push_back(make_check("peak_exponent", e_peak, bp.alpha,
                                    std::abs(e_peak - bp.alpha) <= 0.1 * bp.alpha));
    if (manifold) {
      const double e_support = std::log(supports[last] / supports[first]) / span;
      rep.checks.push_back(make_check("support_exponent", e_support, bp.beta,
                                      std::abs(e_support - bp.beta) <= 0.1 * bp.beta));
    }
  }
  const double R_support = manifold ? manifold_support_radius(0.0, bp)
                                    : std::exp(bp.a * std::pow(bp.T, bp.beta));
  rep.constants["barrier_support_t0"] = R_support;
  rep.constants["domain_contains_support_t0"] = R_support <= cfg.model.R;
  add_nonnegativity(rep, traj);
}

void scenario_integrable(const ScenarioConfig &cfg, RunReport &rep) {
  if (!cfg.model.weight.integrable_in(cfg.model.geom.dimension()))
    fail("integrable-weight-run: weight must be integrable on R^N");
  rep.constants["rho_total"] =
      weight_total_mass(cfg.model.weight, cfg.model.geom.dimension(), kInfinity);
  const Trajectory traj = run_solver(cfg);
  double early = 0.0;
  double late = 0.0;
  for (const auto &r : traj.records) {
    rep.rows.push_back(row_from(r));
    if (r.t >= cfg.plateau_start * (1.0 - 1e-12)) {
      late = std::max(late, r.linf);
      if (r.t <= cfg.plateau_early_end * (1.0 + 1e-12))
        early = std::max(early, r.linf);
    }
  }
  const double ratio = early > 0.0 ? late / early : (late > 0.0 ? kInfinity : 0.0);
  rep.checks.push_back(make_check("plateau", ratio, cfg.tol.plateau_factor,
                                  ratio <= cfg.tol.plateau_factor,
                                  "sup_[t_start,t_end] ||u||_inf / sup_[t_start,t_early_end] ||u||_inf"));
  add_nonnegativity(rep, traj);
}

void scenario_poincare(const ScenarioConfig &cfg, RunReport &rep) {
  const auto est = poincare_estimate(cfg.model.geom, cfg.model.weight, cfg.model.R, cfg.cells);
  rep.constants["lambda1"] = est.lambda1;
  rep.constants["C_p"] = est.C_p;
  rep.constants["iterations"] = est.iterations;
  rep.constants["residual"] = est.residual;
  rep.checks.push_back(make_check("converged", est.residual, 1e-10, est.residual <= 1e-10));
  if (cfg.source.contains("expect")) {
    const json &e = cfg.source.at("expect");
    const double lo = number_or(e, "lambda_min", -kInfinity, "expect");
    const double hi = number_or(e, "lambda_max", kInfinity, "expect");
    rep.checks.push_back(make_check("lambda1_window", est.lambda1, hi,
                                    est.lambda1 >= lo && est.lambda1 <= hi));
  }
}

void scenario_ladder(const ScenarioConfig &cfg, RunReport &rep) {
  const MonotonicityReport mr =
      ladder_check(cfg.model, cfg.cells, make_datum(cfg), cfg.ladder_k, cfg.ladder_R,
                   cfg.ladder_h, cfg.schedule, cfg.options);
  json rungs = json::array();
  for (const auto &c : mr.comparisons)
    rungs.push_back({{"axis", c.axis}, {"lower", jnum(c.lower)}, {"upper", jnum(c.upper)},
                     {"max_violation", c.max_violation}});
  rep.constants["comparisons"] = rungs;
  rep.checks.push_back(make_check("monotone_k", mr.max_violation_k, cfg.tol.ladder,
                                  mr.max_violation_k <= cfg.tol.ladder));
  rep.checks.push_back(make_check("monotone_R", mr.max_violation_R, cfg.tol.ladder,
                                  mr.max_violation_R <= cfg.tol.ladder));
  rep.checks.push_back(make_check("monotone_h", mr.max_violation_h, cfg.tol.ladder,
                                  mr.max_violation_h <= cfg.tol.ladder));
}

} // namespace

RunReport run_scenario(const ScenarioConfig &cfg) {
  RunReport rep;
  rep.kind = cfg.kind;
  rep.name = cfg.name;
  try {
    if (cfg.kind == "simulate")
      scenario_simulate(cfg, rep);
    else if (cfg.kind == "verify-lq")
      scenario_verify_lq(cfg, rep);
    else if (cfg.kind == "verify-smoothing")
      scenario_verify_smoothing(cfg, rep);
    else if (cfg.kind == "barrier-check")
      scenario_barrier_check(cfg, rep);
    else if (cfg.kind == "blowup-run")
      scenario_blowup(cfg, rep);
    else if (cfg.kind == "integrable-weight-run")
      scenario_integrable(cfg, rep);
    else if (cfg.kind == "poincare")
      scenario_poincare(cfg, rep);
    else if (cfg.kind == "ladder-check")
      scenario_ladder(cfg, rep);
  } catch (const SolverError &e) {
    rep.solver_failed = true;
    rep.errors.push_back(std::string("solver: ") + e.what());
  } catch (const ConvergenceError &e) {
    rep.solver_failed = true;
    rep.errors.push_back(std::string("eigensolver: ") + e.what());
  }
  return rep;
}

std::string trajectory_csv(const RunReport &report) {
  std::string out = "t,l1,lm,lq,linf,smoothing_bound,lq_bound,barrier_min_ratio\n";
  auto opt = [](const std::optional<double> &v) { return v ? fmt(*v) : std::string(); };
  for (const auto &r : report.rows) {
    out += fmt(r.t) + "," + fmt(r.l1) + "," + fmt(r.lm) + "," + fmt(r.lq) + "," + fmt(r.linf) +
           "," + opt(r.smoothing_bound) + "," + opt(r.lq_bound) + "," +
           opt(r.barrier_min_ratio) + "\n";
  }
  return out;
}

json report_json(const RunReport &report, const ScenarioConfig &cfg) {
  json j;
  j["scenario"] = report.kind;
  j["name"] = report.name;
  j["verdict"] = report.pass() ? "pass" : "fail";
  j["exit_code"] = report.exit_code();
  j["constants"] = report.constants;
  json checks = json::array();
  for (const auto &c : report.checks) {
    json e = {{"name", c.name}, {"pass", c.pass}, {"value", jnum(c.value)},
              {"bound", jnum(c.bound)}};
    if (!c.detail.empty())
      e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  json feas = json::array();
  for (const auto &c : report.feasibility.conditions) {
    json e = {{"name", c.name}, {"pass", c.pass}, {"margin", jnum(c.margin)}};
    if (c.sampled) {
      e["sampled"] = true;
      e["worst_t"] = c.worst_t;
    }
    feas.push_back(e);
  }
  j["feasibility"] = feas;
  j["errors"] = report.errors;
  j["tolerances"] = {{"lq_slack", cfg.tol.lq_slack},
                     {"smoothing_slack", cfg.tol.smoothing_slack},
                     {"slope_slack", cfg.tol.slope_slack},
                     {"barrier_slack", cfg.tol.barrier_slack},
                     {"growth_factor", cfg.tol.growth_factor},
                     {"plateau_factor", cfg.tol.plateau_factor},
                     {"ladder", cfg.tol.ladder},
                     {"residual", cfg.tol.residual},
                     {"ab", cfg.tol.ab}};
  j["config"] = cfg.source;
  return j;
}

void write_outputs(const RunReport &report, const ScenarioConfig &cfg,
                   const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
    csv << trajectory_csv(report);
  }
  std::ofstream js(dir / "report.json", std::ios::binary);
  js << report_json(report, cfg).dump(2) << "\n";
}

int run_config_file(const std::filesystem::path &config, const std::filesystem::path &out_dir,
                    int jobs, std::ostream &log) {
  std::vector<ScenarioConfig> scenarios;
  try {
    std::ifstream in(config);
    if (!in)
      fail("cannot open " + config.string());
    json j;
    try {
      in >> j;
    } catch (const json::exception &e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    scenarios = parse_config(j, default_tolerances());
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  const bool nested = scenarios.size() > 1;
  std::vector<int> codes(scenarios.size(), kExitPass);
  std::vector<std::string> lines(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const ScenarioConfig &cfg = scenarios[i];
      try {
        const RunReport rep = run_scenario(cfg);
        write_outputs(rep, cfg, nested ? out_dir / cfg.name : out_dir);
        codes[i] = rep.exit_code();
        std::string line = cfg.name + ": " + (rep.pass() ? "PASS" : "FAIL");
        for (const auto &c : rep.checks)
          if (!c.pass)
            line += " [" + c.name + " value=" + fmt(c.value) + " bound=" + fmt(c.bound) + "]";
        for (const auto &e : rep.errors)
          line += " [" + e + "]";
        lines[i] = line;
      } catch (const ConfigError &e) {
        codes[i] = kExitUsage;
        lines[i] = cfg.name + ": config error: " + e.what();
      } catch (const std::exception &e) {
        codes[i] = kExitUsage;
        lines[i] = cfg.name + ": error: " + e.what();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(scenarios.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < workers; ++k)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  int code = kExitPass;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    log << lines[i] << "\n";
    if (codes[i] == kExitUsage)
      code = kExitUsage;
    else if (codes[i] == kExitViolation && code == kExitPass)
      code = kExitViolation;
  }
  return code;
}

} // namespace rdlab::cli
