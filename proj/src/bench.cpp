#include "clarsta/bench.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace clarsta::bench {
namespace {

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SpecError("config key '" + key + "' has the wrong type");
  }
}

bool contains_name(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

void ExperimentSpec::validate() const {
  if (!contains_name(problems::objective_names(), problem)) throw SpecError("unknown problem: " + problem);
  if (!contains_name(problems::constraint_names(), constraint)) throw SpecError("unknown constraint: " + constraint);
  if (n < 2) throw SpecError("n must be >= 2");
  if (p < 1 || p > n) throw SpecError("need 1 <= p <= n");
  if (p_rand < 1 || p_rand > p) throw SpecError("need 1 <= p_rand <= p");
  if (effective_budget() < p + 1) throw SpecError("budget must allow one model build (>= p + 1)");
  if (!config.is_object()) throw SpecError("config overrides must be a JSON object");
}

void apply_config_overrides(SolverConfig<double>& c, const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw SpecError("config overrides must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "p") c.p = get_as<int>(value, key);
    else if (key == "p_rand") c.p_rand = get_as<int>(value, key);
    else if (key == "delta0") c.delta0 = get_as<double>(value, key);
    else if (key == "delta_min") c.delta_min = get_as<double>(value, key);
    else if (key == "delta_max") c.delta_max = get_as<double>(value, key);
    else if (key == "gamma_dec") c.gamma_dec = get_as<double>(value, key);
    else if (key == "gamma_inc_schedule") {
      // a constant, or per-iteration values whose last entry repeats until k_bar
      std::vector<double> values;
      if (value.is_number()) values.push_back(value.get<double>());
      else values = get_as<std::vector<double>>(value, key);
      if (values.empty()) throw SpecError("gamma_inc_schedule must not be empty");
      for (double v : values)
        if (!(v >= 1.0)) throw SpecError("gamma_inc_schedule values must be >= 1");
      c.gamma_inc_schedule = [values](long k) {
        return values[std::min(static_cast<std::size_t>(k), values.size() - 1)];
      };
    } else if (key == "k_bar") c.k_bar = get_as<long>(value, key);
    else if (key == "eta1") c.eta1 = get_as<double>(value, key);
    else if (key == "eta2") c.eta2 = get_as<double>(value, key);
    else if (key == "mu") c.mu = get_as<double>(value, key);
    else if (key == "eps_rad") c.eps_rad = get_as<double>(value, key);
    else if (key == "eps_geo") c.eps_geo = get_as<double>(value, key);
    else if (key == "T") c.T = get_as<int>(value, key);
    else if (key == "max_evals") c.max_evals = get_as<long>(value, key);
    else if (key == "max_iterations") c.max_iterations = get_as<long>(value, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(value, key);
    else if (key == "infeasible_mirror_mode") c.infeasible_mirror_mode = get_as<bool>(value, key);
    else if (key == "mirror_max_resamples") c.mirror_max_resamples = get_as<int>(value, key);
    else if (key == "kappa_tr") c.subproblem.kappa_tr = get_as<double>(value, key);
    else if (key == "pgd_max_iter") c.subproblem.pgd_max_iter = get_as<int>(value, key);
    else if (key == "pgd_tol") c.subproblem.pgd_tol = get_as<double>(value, key);
    else if (key == "dykstra_tol") c.subproblem.projection.dykstra_tol = get_as<double>(value, key);
    else if (key == "dykstra_max_iter") c.subproblem.projection.dykstra_max_iter = get_as<int>(value, key);
    else throw SpecError("unknown config key: " + key);
  }
}

double measure_t_feval(const problems::Objective& f, const Eigen::VectorXd& x0, long count, std::uint64_t seed) {
  if (count <= 0) return 0.0;
  Rng rng(seed ^ 0x5eedf00dULL);
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    Eigen::VectorXd x = x0;
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += 1e-3 * rng.normal();
    points.push_back(std::move(x));
  }
  volatile double sink = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& x : points) sink = sink + f(x);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return elapsed / static_cast<double>(count);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_csv_header() {
  return "k,delta_k,pi_m_approx,rho_k,accepted,model_test_passed,f_best,nf_so_far,sigma_min_DU,resampled";
}

std::string trace_csv_row(const IterationRecord<double>& r) {
  return join_csv({std::to_string(r.k), format_double(r.delta_k), format_double(r.pi_m_approx),
                   r.rho_k ? format_double(*r.rho_k) : std::string{}, r.accepted ? "1" : "0",
                   r.model_test_passed ? "1" : "0", format_double(r.f_best), std::to_string(r.nf_so_far),
                   r.sigma_min_DU ? format_double(*r.sigma_min_DU) : std::string{}, r.resampled ? "1" : "0"});
}

std::string trace_csv(const std::vector<IterationRecord<double>>& trace) {
  std::string out = trace_csv_header() + "\n";
  for (const auto& rec : trace) out += trace_csv_row(rec) + "\n";
  return out;
}

std::string summary_csv_header() {
  return "problem,constraint,n,p,p_rand,seed,nf,best_value,total_time_s,alg_time_s,t_feval_s,stop_reason";
}

std::string summary_csv_row(const SummaryRow& r) {
  return join_csv({r.problem, r.constraint, std::to_string(r.n), std::to_string(r.p), std::to_string(r.p_rand),
                   std::to_string(r.seed), std::to_string(r.nf), format_double(r.best_value),
                   format_double(r.total_time_s), format_double(r.alg_time_s), format_double(r.t_feval_s),
                   r.stop_reason});
}

std::string trace_file_name(const ExperimentSpec& s) {
  return "trace_" + s.problem + "_" + s.constraint + "_n" + std::to_string(s.n) + "_p" + std::to_string(s.p) + "_r" +
         std::to_string(s.p_rand) + "_s" + std::to_string(s.seed) + ".csv";
}

namespace {

ExperimentOutcome run_cell(const ExperimentSpec& spec) {
  spec.validate();
  const auto instance = problems::make_instance(spec.problem, spec.constraint, spec.n);

  SolverConfig<double> config;
  apply_config_overrides(config, spec.config);
  config.p = spec.p;
  config.p_rand = spec.p_rand;
  config.seed = spec.seed;
  config.max_evals = spec.effective_budget();
  try {
    config.validate(spec.n);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }

  ExperimentOutcome out;
  out.timing.t_feval = measure_t_feval(instance.objective, instance.x0, std::min<long>(1000, config.max_evals),
                                       spec.seed);
  out.result = minimize<double>(instance.objective, instance.set, instance.x0, config);
  out.timing.total_time = out.result.wall_time;
  out.timing.nf = out.result.nf;
  out.timing.alg_time = out.timing.total_time - static_cast<double>(out.timing.nf) * out.timing.t_feval;
  out.result.alg_time_estimate = out.timing.alg_time;

  out.summary = SummaryRow{spec.problem,
                           spec.constraint,
                           spec.n,
                           spec.p,
                           spec.p_rand,
                           spec.seed,
                           out.result.nf,
                           out.result.best_value,
                           out.timing.total_time,
                           out.timing.alg_time,
                           out.timing.t_feval,
                           to_string(out.result.stop_reason)};

  if (!spec.output_dir.empty()) {
    std::filesystem::create_directories(spec.output_dir);
    out.trace_path = spec.output_dir / trace_file_name(spec);
    write_file(out.trace_path, trace_csv(out.result.iterations));
  }
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  auto out = run_cell(spec);
  if (!spec.output_dir.empty()) {
    write_file(spec.output_dir / "summary.csv", summary_csv_header() + "\n" + summary_csv_row(out.summary) + "\n");
  }
  return out;
}

void GridSpec::validate() const {
  if (ns.empty() || problems.empty() || constraints.empty() || p_choices.empty() || seeds.empty()) {
    throw SpecError("grid lists (ns, problems, constraints, p_choices, seeds) must be nonempty");
  }
  for (const auto& name : problems)
    if (!contains_name(problems::objective_names(), name)) throw SpecError("unknown problem: " + name);
  for (const auto& name : constraints)
    if (!contains_name(problems::constraint_names(), name)) throw SpecError("unknown constraint: " + name);
  if (jobs < 1) throw SpecError("jobs must be >= 1");
  if (!config.is_object()) throw SpecError("grid config must be a JSON object");
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("grid spec must be a JSON object");
  GridSpec g;
  for (const auto& [key, value] : j.items()) {
    if (key == "ns") g.ns = get_as<std::vector<Eigen::Index>>(value, key);
    else if (key == "problems") g.problems = get_as<std::vector<std::string>>(value, key);
    else if (key == "constraints") g.constraints = get_as<std::vector<std::string>>(value, key);
    else if (key == "p_choices") g.p_choices = get_as<std::vector<std::pair<int, int>>>(value, key);
    else if (key == "seeds") g.seeds = get_as<std::vector<std::uint64_t>>(value, key);
    else if (key == "budget") g.budget = get_as<long>(value, key);
    else if (key == "config") g.config = value;
    else if (key == "jobs") g.jobs = get_as<int>(value, key);
    else throw SpecError("unknown grid key: " + key);
  }
  g.validate();
  return g;
}

std::vector<SummaryRow> run_grid(const GridSpec& grid, const std::filesystem::path& output_dir) {
  grid.validate();
  std::vector<ExperimentSpec> cells;
  for (auto n : grid.ns)
    for (const auto& prob : grid.problems)
      for (const auto& con : grid.constraints)
        for (const auto& [p, p_rand] : grid.p_choices)
          for (auto seed : grid.seeds) {
            ExperimentSpec s;
            s.problem = prob;
            s.constraint = con;
            s.n = n;
            s.p = p;
            s.p_rand = p_rand;
            s.seed = seed;
            s.budget = grid.budget;
            s.config = grid.config;
            s.output_dir = output_dir;
            cells.push_back(std::move(s));
          }

  std::vector<SummaryRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& s = cells[i];
      try {
        rows[i] = run_cell(s).summary;
      } catch (const std::exception& e) {
        rows[i] = SummaryRow{s.problem, s.constraint, s.n, s.p, s.p_rand, s.seed, 0, 0.0, 0.0, 0.0, 0.0,
                             std::string("Failed: ") + e.what()};
        for (char& ch : rows[i].stop_reason)
          if (ch == ',' || ch == '\n') ch = ';';
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(grid.jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    std::string csv = summary_csv_header() + "\n";
    for (const auto& r : rows) csv += summary_csv_row(r) + "\n";
    write_file(output_dir / "summary.csv", csv);
  }
  return rows;
}

}  // namespace clarsta::bench
