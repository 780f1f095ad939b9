#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "clarsta/convex_sets.hpp"
#include "clarsta/ledger.hpp"
#include "clarsta/linalg.hpp"
#include "clarsta/models.hpp"
#include "clarsta/rng.hpp"
#include "clarsta/sample_set.hpp"
#include "clarsta/subspace_sampling.hpp"
#include "clarsta/tr_subproblem.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

template <typename Scalar>
struct SolverConfig {
  int p = 1;
  int p_rand = 1;
  Scalar delta0 = Scalar(1);
  Scalar delta_min = Scalar(1e-8);
  Scalar delta_max = Scalar(1e3);
  Scalar gamma_dec = Scalar(0.5);
  /// Increase factor for iteration k < k_bar; iterations k >= k_bar always use 1.
  std::function<Scalar(long)> gamma_inc_schedule = [](long) { return Scalar(2); };
  long k_bar = 1000;
  Scalar eta1 = Scalar(0.1);
  Scalar eta2 = Scalar(0.7);
  Scalar mu = Scalar(100);
  Scalar eps_rad = Scalar(2);
  Scalar eps_geo = Scalar(1e-8);
  int T = 10;
  long max_evals = std::numeric_limits<long>::max();
  long max_iterations = 1000000;
  std::uint64_t seed = 0;
  bool infeasible_mirror_mode = false;
  int mirror_max_resamples = 10;
  SubproblemSettings<Scalar> subproblem;

  Scalar gamma_inc(long k) const {
    if (k >= k_bar) return Scalar(1);
    const Scalar g = gamma_inc_schedule(k);
    if (!(g >= Scalar(1))) throw std::invalid_argument("SolverConfig: gamma_inc_schedule returned a value below 1");
    return g;
  }

  void validate(Eigen::Index n) const {
    using detail::require;
    require(p >= 1 && p <= n, "SolverConfig: need 1 <= p <= n");
    require(p_rand >= 1 && p_rand <= p, "SolverConfig: need 1 <= p_rand <= p");
    require(delta_min > 0 && delta_min <= delta0 && delta0 <= delta_max,
            "SolverConfig: need 0 < delta_min <= delta0 <= delta_max");
    require(gamma_dec > 0 && gamma_dec < 1, "SolverConfig: gamma_dec must be in (0,1)");
    require(static_cast<bool>(gamma_inc_schedule), "SolverConfig: missing gamma_inc_schedule");
    require(k_bar >= 0, "SolverConfig: k_bar must be nonnegative");
    require(eta1 > 0 && eta1 <= eta2 && eta2 < 1, "SolverConfig: need 0 < eta1 <= eta2 < 1");
    require(mu > 0, "SolverConfig: mu must be positive");
    require(eps_rad >= 1, "SolverConfig: eps_rad must be >= 1");
    require(eps_geo > 0, "SolverConfig: eps_geo must be positive");
    require(T >= 1, "SolverConfig: T must be >= 1");
    require(max_evals >= 1, "SolverConfig: max_evals must be >= 1");
    require(max_iterations >= 1, "SolverConfig: max_iterations must be >= 1");
    require(mirror_max_resamples >= 0, "SolverConfig: negative mirror_max_resamples");
    subproblem.validate();
  }
};

template <typename Scalar>
struct IterationRecord {
  long k = 0;
  Scalar delta_k = 0;
  Scalar pi_m_approx = 0;
  std::optional<Scalar> rho_k;
  bool accepted = false;           // x_{k+1} != x_k
  bool model_test_passed = false;  // delta_k <= mu * pi_m
  Scalar f_best = 0;
  long nf_so_far = 0;
  std::optional<Scalar> sigma_min_DU;
  bool resampled = false;          // every column of D_k was freshly generated
};

enum class StopReason { RadiusBelowMin, BudgetExhausted, MaxIterations };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::RadiusBelowMin: return "RadiusBelowMin";
    case StopReason::BudgetExhausted: return "BudgetExhausted";
    case StopReason::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

/// Runtime checks of the algorithm's invariants; every counter is zero in a
/// healthy run except the informational ones at the end.
struct InvariantCounters {
  long sigma_min_violations = 0;       // nonempty reused block with sigma_min < eps_geo
  long column_norm_violations = 0;     // reused column longer than eps_rad * delta
  long random_column_violations = 0;   // D_k with fewer than p_rand random columns
  long resample_window_violations = 0; // T success iterations in a row without a fresh D
  long infeasible_iterates = 0;
  long monotonicity_violations = 0;
  long duplicate_evaluations = 0;
  // informational
  long cauchy_shortfalls = 0;          // subproblem decrease below the sufficient-decrease bound
  long mirrored_tips = 0;
  long resampled_tips = 0;
  long infeasible_tips = 0;            // tips evaluated outside C
  long degenerate_models = 0;

  long total_violations() const {
    return sigma_min_violations + column_norm_violations + random_column_violations + resample_window_violations +
           infeasible_iterates + monotonicity_violations + duplicate_evaluations;
  }
};

template <typename Scalar>
struct RunResult {
  Vector<Scalar> best_point;
  Scalar best_value = std::numeric_limits<Scalar>::infinity();
  std::vector<IterationRecord<Scalar>> iterations;
  StopReason stop_reason = StopReason::MaxIterations;
  long nf = 0;
  double wall_time = 0;                    // seconds
  std::optional<double> alg_time_estimate;  // wall_time - nf * t_feval, when t_feval is known
  InvariantCounters invariants;
};

/// Result of trying the mirrored direction for an infeasible sample point.
enum class MirrorOutcome { Mirrored, ResampleNeeded };

/// For x_k + d outside C: -d if x_k - d lies in C, otherwise a request to resample d.
template <typename Scalar>
std::pair<MirrorOutcome, Vector<Scalar>> mirror_fallback(const Vector<Scalar>& x_k, const Vector<Scalar>& d,
                                                         const ConvexSet<Scalar>& set) {
  if (contains(set, Vector<Scalar>(x_k - d))) return {MirrorOutcome::Mirrored, -d};
  return {MirrorOutcome::ResampleNeeded, d};
}

/// Random-subspace trust-region iteration for min f over a closed convex set
/// using function values only. Owns its evaluation ledger and random stream.
template <typename Scalar>
class Solver {
 public:
  using Objective = std::function<Scalar(const Vector<Scalar>&)>;

  Solver(Objective objective, ConvexSet<Scalar> set, Vector<Scalar> x0, SolverConfig<Scalar> config)
      : f_(std::move(objective)), set_(std::move(set)), config_(std::move(config)), rng_(config_.seed) {
    detail::require(static_cast<bool>(f_), "Solver: missing objective");
    detail::require_dims(set_.dimension(), x0.size(), "Solver x0");
    config_.validate(x0.size());
    if (!contains(set_, x0, Scalar(0))) throw std::invalid_argument("Solver: x0 is not feasible");
    n_ = x0.size();
    x_ = std::move(x0);
    delta_ = config_.delta0;
    D_ = generate_directions<Scalar>(n_, config_.p, delta_, nullptr, rng_);
    columns_.assign(static_cast<std::size_t>(config_.p), ColumnProvenance{ColumnOrigin::Random, std::nullopt});
  }

  /// Runs one iteration. Returns false once the run has stopped.
  bool step() {
    if (stop_) return false;
    if (!ensure_center_evaluated() || !ensure_tips_evaluated()) return false;

    check_random_columns();
    const bool all_random = std::all_of(columns_.begin(), columns_.end(),
                                        [](const auto& c) { return c.origin == ColumnOrigin::Random; });

    std::optional<DirectionMatrix<Scalar>> dm;
    std::optional<LinearSubspaceModel<Scalar>> model;
    try {
      dm = DirectionMatrix<Scalar>::factorize(D_, columns_);
      model = build_model(x_, *dm, ledger_[*x_index_].value, tip_values());
    } catch (const DegenerateGeometry&) {
      ++invariants_.degenerate_models;
      resample_all(delta_);
      return true;
    }

    const Scalar f_k = ledger_[*x_index_].value;
    IterationRecord<Scalar> rec;
    rec.k = k_;
    rec.delta_k = delta_;
    rec.pi_m_approx = criticality_approx(*model, set_, config_.subproblem.projection);
    rec.resampled = all_random;
    rec.model_test_passed = delta_ <= config_.mu * rec.pi_m_approx;

    Scalar delta_next = delta_;
    if (rec.model_test_passed) {
      if (!success_branch(*model, rec, f_k, delta_next)) return finish_partial();
    } else {
      delta_next = config_.gamma_dec * delta_;
      D_ *= config_.gamma_dec;
      for (auto& c : columns_) c.ledger_index.reset();
    }

    if (!contains(set_, x_, Scalar(1e-9))) ++invariants_.infeasible_iterates;
    const Scalar f_next = ledger_[*x_index_].value;
    if (f_next > f_k) ++invariants_.monotonicity_violations;

    delta_ = delta_next;
    push_record(rec);
    ++k_;
    if (delta_ < config_.delta_min) {
      stop_ = StopReason::RadiusBelowMin;
    } else if (k_ >= config_.max_iterations) {
      stop_ = StopReason::MaxIterations;
    }
    return !stop_;
  }

  RunResult<Scalar> run() {
    const auto start = std::chrono::steady_clock::now();
    while (step()) {
    }
    auto result = this->result();
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  RunResult<Scalar> result() const {
    RunResult<Scalar> r;
    if (const auto best = ledger_.best_feasible()) {
      r.best_point = ledger_[*best].point;
      r.best_value = ledger_[*best].value;
    } else {
      r.best_point = x_;
    }
    r.iterations = trace_;
    r.stop_reason = stop_.value_or(StopReason::MaxIterations);
    r.nf = static_cast<long>(ledger_.nf());
    r.invariants = invariants_;
    if (!ledger_.points_unique()) ++r.invariants.duplicate_evaluations;
    return r;
  }

  const EvaluationLedger<Scalar>& ledger() const { return ledger_; }
  const Vector<Scalar>& iterate() const { return x_; }
  const Matrix<Scalar>& directions() const { return D_; }
  const std::vector<ColumnProvenance>& provenance() const { return columns_; }
  Scalar radius() const { return delta_; }
  long iteration() const { return k_; }
  std::optional<StopReason> stop_reason() const { return stop_; }
  const InvariantCounters& invariants() const { return invariants_; }

 private:
  static constexpr Scalar kFeasibleStepTol = Scalar(1e-9);

  /// Index of `point` in the ledger, evaluating it if needed; nullopt (and the
  /// run stopped) when the budget is spent.
  std::optional<std::size_t> evaluate(const Vector<Scalar>& point, bool feasible) {
    if (auto idx = ledger_.find(point)) return idx;
    if (static_cast<long>(ledger_.nf()) >= config_.max_evals) {
      stop_ = StopReason::BudgetExhausted;
      return std::nullopt;
    }
    const Scalar value = f_(point);
    if (!std::isfinite(value)) throw std::runtime_error("Solver: objective returned a non-finite value");
    return ledger_.append(point, value, feasible);
  }

  bool ensure_center_evaluated() {
    if (x_index_) return true;
    x_index_ = evaluate(x_, true);
    return x_index_.has_value();
  }

  bool ensure_tips_evaluated() {
    for (Eigen::Index c = 0; c < D_.cols(); ++c) {
      auto& col = columns_[static_cast<std::size_t>(c)];
      if (col.ledger_index) continue;
      Vector<Scalar> tip = x_ + D_.col(c);
      bool feasible = contains(set_, tip, Scalar(0));
      if (!feasible && config_.infeasible_mirror_mode) {
        feasible = repair_tip(c, tip);
      }
      if (!feasible) ++invariants_.infeasible_tips;
      const auto idx = evaluate(tip, feasible);
      if (!idx) return false;
      col.ledger_index = idx;
    }
    return true;
  }

  /// Mirrors or resamples column c until its tip is feasible; updates D_ and `tip`.
  bool repair_tip(Eigen::Index c, Vector<Scalar>& tip) {
    for (int attempt = 0; attempt <= config_.mirror_max_resamples; ++attempt) {
      auto [outcome, d] = mirror_fallback<Scalar>(x_, D_.col(c), set_);
      if (outcome == MirrorOutcome::Mirrored) {
        D_.col(c) = d;
        tip = x_ + D_.col(c);
        ++invariants_.mirrored_tips;
        return true;
      }
      if (attempt == config_.mirror_max_resamples) break;
      const Scalar length = D_.col(c).norm();
      Matrix<Scalar> others(n_, D_.cols() - 1);
      for (Eigen::Index j = 0, o = 0; j < D_.cols(); ++j)
        if (j != c) others.col(o++) = D_.col(j);
      Matrix<Scalar> fresh;
      if (others.cols() > 0) {
        const Matrix<Scalar> basis = thin_qr(others).Q;
        fresh = generate_directions<Scalar>(n_, 1, length, &basis, rng_);
      } else {
        fresh = generate_directions<Scalar>(n_, 1, length, nullptr, rng_);
      }
      D_.col(c) = fresh.col(0);
      columns_[static_cast<std::size_t>(c)].origin = ColumnOrigin::Random;
      tip = x_ + D_.col(c);
      ++invariants_.resampled_tips;
      if (contains(set_, tip, Scalar(0))) return true;
    }
    return false;
  }

  std::vector<Vector<Scalar>> tip_points() const {
    std::vector<Vector<Scalar>> tips;
    for (const auto& c : columns_) tips.push_back(ledger_[*c.ledger_index].point);
    return tips;
  }

  Vector<Scalar> tip_values() const {
    Vector<Scalar> v(static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t c = 0; c < columns_.size(); ++c) v(static_cast<Eigen::Index>(c)) =
        ledger_[*columns_[c].ledger_index].value;
    return v;
  }

  void check_random_columns() {
    const auto randoms = std::count_if(columns_.begin(), columns_.end(),
                                       [](const auto& c) { return c.origin == ColumnOrigin::Random; });
    if (randoms < config_.p_rand) ++invariants_.random_column_violations;
  }

  void resample_all(Scalar delta) {
    D_ = generate_directions<Scalar>(n_, config_.p, delta, nullptr, rng_);
    columns_.assign(static_cast<std::size_t>(config_.p), ColumnProvenance{ColumnOrigin::Random, std::nullopt});
  }

  /// Subproblem, radius update, next iterate and next direction matrix. Returns
  /// false when the budget ran out part way.
  bool success_branch(const LinearSubspaceModel<Scalar>& model, IterationRecord<Scalar>& rec, Scalar f_k,
                      Scalar& delta_next) {
    // Assumption-7 bookkeeping: count success iterations since the last fresh D
    if (rec.resampled) {
      success_run_ = 0;
    } else if (++success_run_ >= config_.T) {
      ++invariants_.resample_window_violations;
    }

    const auto sub = solve_subproblem(model, delta_, set_, rec.pi_m_approx, config_.subproblem);
    if (!sub.cauchy_ok) ++invariants_.cauchy_shortfalls;

    std::optional<Vector<Scalar>> trial;
    Scalar rho = -std::numeric_limits<Scalar>::infinity();
    if (sub.model_decrease > Scalar(1e-14) * (Scalar(1) + std::abs(f_k))) {
      const auto projected = project_with_status(set_, Vector<Scalar>(x_ + model.Q * sub.s_hat),
                                                 config_.subproblem.projection);
      if (contains(set_, projected.point, kFeasibleStepTol)) {
        const auto idx = evaluate(projected.point, true);
        if (!idx) return false;
        trial = projected.point;
        rho = (f_k - ledger_[*idx].value) / sub.model_decrease;
      }
    }
    rec.rho_k = rho;

    if (rho < config_.eta1) {
      delta_next = config_.gamma_dec * delta_;
    } else if (rho > config_.eta2) {
      delta_next = std::min(config_.gamma_inc(k_) * delta_, config_.delta_max);
    } else {
      delta_next = delta_;
    }

    // feasible pair points, then the best of everything evaluated this iteration
    const auto tips = tip_points();
    const auto pairs = pair_points(x_, D_, tips);
    for (const auto& pp : pairs) {
      if (ledger_.find(pp.point)) continue;
      if (!contains(set_, pp.point, Scalar(0))) continue;
      if (!evaluate(pp.point, true)) return false;
    }
    std::size_t next_index = *x_index_;
    auto consider = [&](const Vector<Scalar>& pt) {
      const auto idx = ledger_.find(pt);
      if (!idx || !ledger_[*idx].feasible) return;
      if (ledger_[*idx].value < ledger_[next_index].value) next_index = *idx;
    };
    if (trial) consider(*trial);
    for (const auto& pp : pairs) consider(pp.point);

    const Vector<Scalar> x_next = ledger_[next_index].point;
    rec.accepted = next_index != *x_index_;

    // next direction matrix: reused block plus fresh random directions
    const auto pool = build_candidate_pool(x_, x_next, trial, D_, ledger_, tips);
    const bool force_fresh = success_run_ + 1 >= config_.T;
    const auto reused = select_reusable(pool, n_, delta_next, config_.p, config_.p_rand, config_.eps_rad,
                                        config_.eps_geo, force_fresh ? config_.p : 0);
    if (reused.size() > 0) {
      const Scalar smin = sigma_min(reused.columns);
      rec.sigma_min_DU = smin;
      if (smin < config_.eps_geo) ++invariants_.sigma_min_violations;
      for (Eigen::Index c = 0; c < reused.size(); ++c) {
        if (reused.columns.col(c).norm() > config_.eps_rad * delta_next) ++invariants_.column_norm_violations;
      }
    }

    const Eigen::Index q = config_.p - reused.size();
    Matrix<Scalar> fresh;
    if (reused.size() > 0) {
      const Matrix<Scalar> basis = thin_qr(reused.columns).Q;
      fresh = generate_directions<Scalar>(n_, q, delta_next, &basis, rng_);
    } else {
      fresh = generate_directions<Scalar>(n_, q, delta_next, nullptr, rng_);
    }

    D_.resize(n_, config_.p);
    columns_.clear();
    for (Eigen::Index c = 0; c < reused.size(); ++c) {
      D_.col(c) = reused.columns.col(c);
      columns_.push_back({ColumnOrigin::Reused, reused.ledger_indices[static_cast<std::size_t>(c)]});
    }
    for (Eigen::Index c = 0; c < q; ++c) {
      D_.col(reused.size() + c) = fresh.col(c);
      columns_.push_back({ColumnOrigin::Random, std::nullopt});
    }
    x_ = x_next;
    x_index_ = next_index;
    return true;
  }

  bool finish_partial() {
    stop_ = StopReason::BudgetExhausted;
    return false;
  }

  void push_record(IterationRecord<Scalar>& rec) {
    const auto best = ledger_.best_feasible();
    rec.f_best = best ? ledger_[*best].value : std::numeric_limits<Scalar>::infinity();
    rec.nf_so_far = static_cast<long>(ledger_.nf());
    trace_.push_back(rec);
  }

  Objective f_;
  ConvexSet<Scalar> set_;
  SolverConfig<Scalar> config_;
  Rng rng_;
  Eigen::Index n_ = 0;

  EvaluationLedger<Scalar> ledger_;
  Vector<Scalar> x_;
  std::optional<std::size_t> x_index_;
  Scalar delta_;
  Matrix<Scalar> D_;
  std::vector<ColumnProvenance> columns_;
  long k_ = 0;
  int success_run_ = 0;
  std::optional<StopReason> stop_;
  std::vector<IterationRecord<Scalar>> trace_;
  InvariantCounters invariants_;
};

/// Minimizes `objective` over `set` from the feasible point x0.
template <typename Scalar>
RunResult<Scalar> minimize(std::function<Scalar(const Vector<Scalar>&)> objective, const ConvexSet<Scalar>& set,
                           const Vector<Scalar>& x0, const SolverConfig<Scalar>& config) {
  Solver<Scalar> solver(std::move(objective), set, x0, config);
  return solver.run();
}

}  // namespace clarsta
