#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clarsta/problems.hpp"
#include "clarsta/solver.hpp"

namespace clarsta::bench {

/// Invalid experiment description (unknown names, bad config keys or values).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  std::string problem;
  std::string constraint;
  Eigen::Index n = 10;
  int p = 1;
  int p_rand = 1;
  std::uint64_t seed = 0;
  std::optional<long> budget;   // defaults to 100 (n + 1)
  nlohmann::json config = nlohmann::json::object();  // SolverConfig overrides
  std::filesystem::path output_dir;

  long effective_budget() const { return budget.value_or(100 * (static_cast<long>(n) + 1)); }
  void validate() const;
};

struct TimingReport {
  double total_time = 0;  // seconds
  long nf = 0;
  double t_feval = 0;     // mean seconds per oracle call, from a separate pre-pass
  double alg_time = 0;    // total_time - nf * t_feval
  bool alg_time_negative() const { return alg_time < 0; }
};

struct SummaryRow {
  std::string problem, constraint;
  Eigen::Index n = 0;
  int p = 0, p_rand = 0;
  std::uint64_t seed = 0;
  long nf = 0;
  double best_value = 0;
  double total_time_s = 0, alg_time_s = 0, t_feval_s = 0;
  std::string stop_reason;
};

struct ExperimentOutcome {
  RunResult<double> result;
  TimingReport timing;
  SummaryRow summary;
  std::filesystem::path trace_path;
};

/// Applies JSON overrides whose keys are SolverConfig field names. Unknown keys
/// and out-of-range values raise SpecError.
void apply_config_overrides(SolverConfig<double>& config, const nlohmann::json& overrides);

/// Mean wall time of one oracle call over `count` calls at random perturbations of x0.
double measure_t_feval(const problems::Objective& f, const Eigen::VectorXd& x0, long count, std::uint64_t seed);

// CSV formatting is locale independent: shortest round-trip decimal with '.'.
std::string format_double(double v);
std::string trace_csv_header();
std::string trace_csv_row(const IterationRecord<double>& rec);
std::string trace_csv(const std::vector<IterationRecord<double>>& trace);
std::string summary_csv_header();
std::string summary_csv_row(const SummaryRow& row);

std::string trace_file_name(const ExperimentSpec& spec);

/// Runs one experiment, writing its trace CSV and a one-row summary CSV into
/// spec.output_dir (created if missing).
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

struct GridSpec {
  std::vector<Eigen::Index> ns;
  std::vector<std::string> problems;
  std::vector<std::string> constraints;
  std::vector<std::pair<int, int>> p_choices;  // (p, p_rand)
  std::vector<std::uint64_t> seeds;
  std::optional<long> budget;
  nlohmann::json config = nlohmann::json::object();
  int jobs = 1;

  void validate() const;
  static GridSpec from_json(const nlohmann::json& j);
};

/// Cross product of the grid, one summary row per cell in grid order. A cell
/// that throws at run time yields a row with stop_reason "Failed: ...".
std::vector<SummaryRow> run_grid(const GridSpec& grid, const std::filesystem::path& output_dir);

}  // namespace clarsta::bench
