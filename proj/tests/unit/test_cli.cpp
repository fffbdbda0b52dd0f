#include "rdlab/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rdlab;
using namespace rdlab::cli;
using nlohmann::json;

namespace {

json base_simulate() {
  return json::parse(R"({
    "scenario": "simulate",
    "geometry": {"kind": "hyperbolic", "dim": 3, "kappa": 1},
    "model": {"m": 2, "p": 1.5, "R": 8, "cells": 200},
    "datum": {"kind": "bump", "center": 0, "width": 2, "height": 1},
    "schedule": {"t_first": 0.01, "t_end": 1, "count": 6}
  })");
}

std::filesystem::path scratch_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("rdlab_cli_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("tolerance overrides") {
  const Tolerances t = apply_overrides(Tolerances{}, "lq_slack=0.05,barrier_slack=0.1");
  CHECK(t.lq_slack == 0.05);
  CHECK(t.barrier_slack == 0.1);
  CHECK(t.ladder == Tolerances{}.ladder);
  CHECK_THROWS_AS(apply_overrides(Tolerances{}, "nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_overrides(Tolerances{}, "lq_slack"), ConfigError);
  CHECK_THROWS_AS(apply_overrides(Tolerances{}, "lq_slack=abc"), ConfigError);

  setenv("RDLAB_TOL", "plateau_factor=1.5", 1);
  CHECK(default_tolerances().plateau_factor == 1.5);
  unsetenv("RDLAB_TOL");
  CHECK(default_tolerances().plateau_factor == Tolerances{}.plateau_factor);

  // config-level tolerances sit on top of the environment
  json j = base_simulate();
  j["tolerances"] = {{"lq_slack", 0.2}};
  CHECK(parse_scenario(j, apply_overrides(Tolerances{}, "lq_slack=0.1,ab=0.5")).tol.lq_slack == 0.2);
  CHECK(parse_scenario(j, apply_overrides(Tolerances{}, "ab=0.5")).tol.ab == 0.5);
}

TEST_CASE("config parsing rejects incomplete documents") {
  json j = base_simulate();
  CHECK_NOTHROW(parse_scenario(j, Tolerances{}));
  for (const char *key : {"m", "p"}) {
    json k = base_simulate();
    k["model"].erase(key);
    CHECK_THROWS_AS(parse_scenario(k, Tolerances{}), ConfigError);
  }
  json bad = base_simulate();
  bad["scenario"] = "explode";
  CHECK_THROWS_AS(parse_scenario(bad, Tolerances{}), ConfigError);
  bad = base_simulate();
  bad["model"]["p"] = 3;
  CHECK_THROWS_AS(parse_scenario(bad, Tolerances{}), ConfigError);
  bad = base_simulate();
  bad["schedule"] = {{"checkpoints", {1.0, 0.5}}};
  CHECK_THROWS_AS(parse_scenario(bad, Tolerances{}), ConfigError);
  bad = base_simulate();
  bad["datum"]["width"] = 20;
  CHECK_THROWS_AS(parse_scenario(bad, Tolerances{}), ConfigError);
  bad = base_simulate();
  bad["scenario"] = "blowup-run";
  CHECK_THROWS_AS(parse_scenario(bad, Tolerances{}), ConfigError);

  json k = base_simulate();
  k["model"]["k_trunc"] = "inf";
  CHECK(std::isinf(parse_scenario(k, Tolerances{}).model.k_trunc));
  k["model"]["k_trunc"] = 3;
  CHECK(parse_scenario(k, Tolerances{}).model.k_trunc == 3.0);

  json multi = {{"scenarios", {base_simulate(), base_simulate()}}};
  CHECK_THROWS_AS(parse_config(multi, Tolerances{}), ConfigError);
  multi["scenarios"][1]["name"] = "second";
  CHECK(parse_config(multi, Tolerances{}).size() == 2);
}

TEST_CASE("simulate with zero datum") {
  json j = base_simulate();
  j["datum"] = {{"kind", "zero"}};
  const auto rep = run_scenario(parse_scenario(j, Tolerances{}));
  CHECK(rep.pass());
  CHECK(rep.exit_code() == kExitPass);
  for (const auto &r : rep.rows) {
    CHECK(r.l1 == 0.0);
    CHECK(r.linf == 0.0);
  }
}

TEST_CASE("verify-lq passes on the hyperbolic model") {
  json j = base_simulate();
  j["scenario"] = "verify-lq";
  j["constants"] = {{"poincare_cells", 400}};
  const auto cfg = parse_scenario(j, Tolerances{});
  const auto rep = run_scenario(cfg);
  CHECK(rep.pass());
  CHECK(rep.constants.contains("C_p"));
  for (const auto &r : rep.rows)
    CHECK(r.lq_bound.has_value());
  // the verdict follows from the CSV columns
  for (const auto &r : rep.rows)
    CHECK(r.lq <= *r.lq_bound * (1 + cfg.tol.lq_slack));
}

TEST_CASE("manifold blow-up run grows across decades") {
  const json j = json::parse(R"({
    "scenario": "blowup-run",
    "geometry": {"kind": "hyperbolic", "dim": 3, "kappa": 1},
    "model": {"m": 2, "p": 1.5, "R": 112, "cells": 1000},
    "barrier": {"C": 0.5, "a": 1, "alpha": 0.5, "tau": 300, "target": "manifold"},
    "datum": {"kind": "manifold_barrier", "lift": 1.2},
    "schedule": {"checkpoints": [1, 10, 100], "dt_max": 0.1}
  })");
  const auto rep = run_scenario(parse_scenario(j, Tolerances{}));
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[2].linf > rep.rows[1].linf);
  CHECK(rep.rows[3].linf > rep.rows[2].linf);
  const Check *cmp = nullptr;
  for (const auto &c : rep.checks)
    if (c.name == "barrier_comparison")
      cmp = &c;
  REQUIRE(cmp);
  CHECK(cmp->pass);
  for (const auto &r : rep.rows)
    CHECK(r.barrier_min_ratio.has_value());
}

TEST_CASE("CSV schema and determinism") {
  const auto cfg = parse_scenario(base_simulate(), Tolerances{});
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  const std::string csv = trajectory_csv(a);
  CHECK(csv.rfind("t,l1,lm,lq,linf,smoothing_bound,lq_bound,barrier_min_ratio\n", 0) == 0);
  CHECK(csv == trajectory_csv(b));
  CHECK(report_json(a, cfg).dump() == report_json(b, cfg).dump());
  // unused columns stay empty
  const auto second_line = csv.substr(csv.find('\n') + 1);
  CHECK(second_line.find(",,,") != std::string::npos);
}

TEST_CASE("config files and exit codes") {
  const auto dir = scratch_dir("files");
  std::ostringstream log;

  const auto good = dir / "good.json";
  std::ofstream(good) << base_simulate().dump();
  CHECK(run_config_file(good, dir / "out", 1, log) == kExitPass);
  CHECK(std::filesystem::exists(dir / "out" / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "report.json"));
  const std::string first = slurp(dir / "out" / "trajectory.csv");
  CHECK(run_config_file(good, dir / "out", 1, log) == kExitPass);
  CHECK(slurp(dir / "out" / "trajectory.csv") == first);

  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run_config_file(broken, dir / "b", 1, log) == kExitUsage);
  CHECK(run_config_file(dir / "missing.json", dir / "m", 1, log) == kExitUsage);

  json j = base_simulate();
  j["model"].erase("m");
  const auto no_m = dir / "no_m.json";
  std::ofstream(no_m) << j.dump();
  CHECK(run_config_file(no_m, dir / "n", 1, log) == kExitUsage);

  // the sup over [1, 3] can never drop below the sup over [1, 2]
  json v = json::parse(R"({
    "scenario": "integrable-weight-run",
    "geometry": {"kind": "euclidean", "dim": 3},
    "weight": {"kind": "integrable", "decay": 4},
    "model": {"m": 2, "p": 1.5, "R": 10, "cells": 100},
    "datum": {"kind": "bump", "center": 0, "width": 2, "height": 1},
    "schedule": {"checkpoints": [1, 2, 3]},
    "plateau": {"t_start": 1, "t_early_end": 2},
    "tolerances": {"plateau_factor": 0.5}
  })");
  const auto viol = dir / "violation.json";
  std::ofstream(viol) << v.dump();
  CHECK(run_config_file(viol, dir / "v", 1, log) == kExitViolation);

  json multi = {{"scenarios", {base_simulate(), base_simulate()}}};
  multi["scenarios"][0]["name"] = "one";
  multi["scenarios"][1]["name"] = "two";
  multi["scenarios"][1]["datum"]["height"] = 0.5;
  const auto many = dir / "many.json";
  std::ofstream(many) << multi.dump();
  CHECK(run_config_file(many, dir / "par", 2, log) == kExitPass);
  CHECK(std::filesystem::exists(dir / "par" / "one" / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "par" / "two" / "report.json"));
  CHECK(run_config_file(many, dir / "seq", 1, log) == kExitPass);
  CHECK(slurp(dir / "par" / "two" / "trajectory.csv") == slurp(dir / "seq" / "two" / "trajectory.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("poincare and ladder scenarios") {
  const json pj = json::parse(R"({
    "scenario": "poincare",
    "geometry": {"kind": "euclidean", "dim": 3},
    "model": {"R": 1, "cells": 500},
    "expect": {"lambda_min": 9.6, "lambda_max": 10.0}
  })");
  const auto pr = run_scenario(parse_scenario(pj, Tolerances{}));
  CHECK(pr.pass());
  CHECK(pr.constants["lambda1"].get<double>() == doctest::Approx(9.8696).epsilon(0.01));

  json lj = base_simulate();
  lj["scenario"] = "ladder-check";
  lj["ladder"] = {{"k", {1, 2, "inf"}}, {"R", {4, 8}}, {"h", {0.5, 1, "inf"}}};
  const auto lr = run_scenario(parse_scenario(lj, Tolerances{}));
  CHECK(lr.pass());
}
