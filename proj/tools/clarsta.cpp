#include <exception>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "clarsta/bench.hpp"

namespace {

constexpr int kInvalidSpec = 2;
constexpr int kRuntimeFailure = 3;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw clarsta::bench::SpecError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw clarsta::bench::SpecError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-subspace derivative-free trust-region benchmarks"};
  app.require_subcommand(1);

  clarsta::bench::ExperimentSpec spec;
  std::string config_path, out_dir;
  long budget = 0;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--problem", spec.problem, "chain_rosenbrock | trigonometric")->required();
  run->add_option("--constraint", spec.constraint, "box | ball | halfspace")->required();
  run->add_option("--n", spec.n, "Dimension")->required();
  run->add_option("--p", spec.p, "Subspace dimension")->required();
  run->add_option("--p-rand", spec.p_rand, "Fresh random directions per iteration")->required();
  run->add_option("--seed", spec.seed, "RNG seed")->required();
  auto* budget_opt = run->add_option("--budget", budget, "Evaluation budget, default 100 (n + 1)");
  run->add_option("--config", config_path, "JSON file of solver parameter overrides");
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string grid_path, grid_out;
  int jobs = 0;
  auto* grid = app.add_subcommand("grid", "Run a grid of experiments from a JSON spec");
  grid->add_option("--spec", grid_path, "Grid spec JSON")->required();
  grid->add_option("--out", grid_out, "Output directory")->required();
  auto* jobs_opt = grid->add_option("--jobs", jobs, "Parallel workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalidSpec;
  }

  try {
    if (*run) {
      if (*budget_opt) spec.budget = budget;
      if (!config_path.empty()) spec.config = read_json(config_path);
      spec.output_dir = out_dir;
      const auto outcome = clarsta::bench::run_experiment(spec);
      std::cout << clarsta::bench::summary_csv_header() << '\n'
                << clarsta::bench::summary_csv_row(outcome.summary) << '\n';
      if (outcome.timing.alg_time_negative())
        std::cerr << "warning: estimated algorithm time is negative (noisy t_feval)\n";
    } else {
      auto g = clarsta::bench::GridSpec::from_json(read_json(grid_path));
      if (*jobs_opt) g.jobs = jobs;
      const auto rows = clarsta::bench::run_grid(g, grid_out);
      std::cout << clarsta::bench::summary_csv_header() << '\n';
      for (const auto& r : rows) std::cout << clarsta::bench::summary_csv_row(r) << '\n';
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kInvalidSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
