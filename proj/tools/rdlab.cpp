// rdlab: scenario runner and constant estimator.

#include "rdlab/cli.hpp"
#include "rdlab/inequalities.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

int run_poincare(const std::string &geometry, double kappa, int dim, double radius, int cells,
                 const std::string &weight, double weight_param) {
  using namespace rdlab;
  try {
    const RadialGeometry geom = geometry == "hyperbolic" ? RadialGeometry::hyperbolic(dim, kappa)
                                                         : RadialGeometry::euclidean(dim);
    Weight w = Weight::unit();
    if (weight == "inverse_square")
      w = Weight::inverse_square(weight_param > 0.0 ? weight_param : kEuler);
    else if (weight == "integrable")
      w = Weight::integrable(weight_param);
    const PoincareEstimate est = poincare_estimate(geom, w, radius, cells);
    const nlohmann::json j = {{"geometry", geom.describe()}, {"weight", w.describe()},
                              {"R", radius},                {"cells", cells},
                              {"lambda1", est.lambda1},     {"C_p", est.C_p},
                              {"iterations", est.iterations}, {"residual", est.residual}};
    std::cout << j.dump(2) << "\n";
    return cli::kExitPass;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const ConvergenceError &e) {
    std::cerr << "eigensolver: " << e.what() << "\n";
    return cli::kExitViolation;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"rdlab: porous medium equation with reaction, simulation and verification"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "rdlab-out";
  int jobs = 1;
  auto *run = app.add_subcommand("run", "run the scenarios of a JSON config");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_option("--jobs", jobs, "parallel scenarios")->check(CLI::PositiveNumber);

  std::string geometry = "euclidean";
  std::string weight = "unit";
  double kappa = 1.0;
  double weight_param = 0.0;
  int dim = 3;
  double radius = 1.0;
  int cells = 2000;
  auto *poincare = app.add_subcommand("poincare", "first Dirichlet eigenvalue and C_p on B_R");
  poincare->add_option("--geometry", geometry)->check(CLI::IsMember({"euclidean", "hyperbolic"}));
  poincare->add_option("--kappa", kappa)->check(CLI::PositiveNumber);
  poincare->add_option("--dim", dim)->check(CLI::Range(2, 64));
  poincare->add_option("--radius", radius)->required()->check(CLI::PositiveNumber);
  poincare->add_option("--cells", cells)->check(CLI::Range(100, 100000000));
  poincare->add_option("--weight", weight)
      ->check(CLI::IsMember({"unit", "inverse_square", "integrable"}));
  poincare->add_option("--weight-param", weight_param, "scale or decay of the weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? rdlab::cli::kExitPass : rdlab::cli::kExitUsage;
  }

  if (*run) {
    try {
      return rdlab::cli::run_config_file(config, out, jobs, std::cout);
    } catch (const rdlab::cli::ConfigError &e) {
      std::cerr << "config error: " << e.what() << "\n";
      return rdlab::cli::kExitUsage;
    }
  }
  return run_poincare(geometry, kappa, dim, radius, cells, weight, weight_param);
}
