#pragma once
//! \file cli.hpp
//! JSON-configured scenarios: parsing, execution and the CSV/JSON artifacts
//! written by `rdlab run`.
//!
//! Exit codes: 0 every check passed, 2 a check failed or the solver gave
//! up, 1 the configuration or command line was unusable.

#include "rdlab/barriers.hpp"
#include "rdlab/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double lq_slack = 0.01;
  double smoothing_slack = 0.0;
  double slope_slack = 0.1;
  double barrier_slack = 0.02;
  double growth_factor = 5.0;
  double plateau_factor = 1.1;
  double ladder = 1e-8;
  double residual = 1e-8;
  double ab = 1e-3;
};

/// Applies "name=value,name=value" overrides (the RDLAB_TOL format). Throws
/// ConfigError on unknown names or malformed values.
Tolerances apply_overrides(Tolerances base, const std::string &spec);
/// Defaults with RDLAB_TOL applied when set.
Tolerances default_tolerances();

struct DatumSpec {
  std::string kind = "zero"; ///< zero | bump | barrier | manifold_barrier
  double center = 0.0;
  double width = 1.0;
  double height = 0.0;
  double lift = 1.0;
};

struct ConstantsSpec {
  std::optional<double> C_p;
  std::optional<double> C_s;
  int poincare_cells = 2000;
  int sobolev_cells = 20000;
};

struct ScenarioConfig {
  std::string kind;
  std::string name;
  ModelParams model;
  int cells = 0;
  SolverOptions options;
  DatumSpec datum;
  TimeSchedule schedule;
  std::optional<BarrierParams> barrier;
  ConstantsSpec constants;
  Tolerances tol;

  // verify-smoothing
  double smoothing_t_min = 1e-3;
  double slope_t_max = 1e-2;
  // blowup-run
  double growth_t_early = 1.0;
  double growth_t_late = 200.0;
  // integrable-weight-run
  double plateau_early_end = 10.0;
  double plateau_start = 1.0;
  // barrier-check
  int sweep_samples = 5000;
  double sweep_t_max = 100.0;
  // ladder-check
  std::vector<double> ladder_k;
  std::vector<double> ladder_R;
  std::vector<double> ladder_h;

  nlohmann::json source;
};

/// Parses one scenario object. base supplies tolerances that a "tolerances"
/// block may override.
ScenarioConfig parse_scenario(const nlohmann::json &j, const Tolerances &base);

/// Either a single scenario or {"scenarios": [...]}.
std::vector<ScenarioConfig> parse_config(const nlohmann::json &j, const Tolerances &base);

struct Check {
  std::string name;
  bool pass;
  double value;
  double bound;
  std::string detail;
};

struct TrajectoryRow {
  double t;
  double l1;
  double lm;
  double lq;
  double linf;
  std::optional<double> smoothing_bound;
  std::optional<double> lq_bound;
  std::optional<double> barrier_min_ratio;
};

struct RunReport {
  std::string kind;
  std::string name;
  std::vector<Check> checks;
  FeasibilityReport feasibility;
  nlohmann::json constants = nlohmann::json::object();
  std::vector<TrajectoryRow> rows;
  std::vector<std::string> errors;
  bool solver_failed = false;

  bool pass() const;
  int exit_code() const;
};

RunReport run_scenario(const ScenarioConfig &cfg);

std::string trajectory_csv(const RunReport &report);
nlohmann::json report_json(const RunReport &report, const ScenarioConfig &cfg);
void write_outputs(const RunReport &report, const ScenarioConfig &cfg,
                   const std::filesystem::path &dir);

/// Runs every scenario of a config file into out_dir (one sub-directory per
/// scenario when there are several) with up to jobs workers, returning the
/// overall exit code.
int run_config_file(const std::filesystem::path &config, const std::filesystem::path &out_dir,
                    int jobs, std::ostream &log);

} // namespace rdlab::cli
