#pragma once

#include <algorithm>
#include <cmath>
#include <variant>

#include "clarsta/convex_sets.hpp"
#include "clarsta/models.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

struct FixedStep {
  double t;
};

/// Start from delta / |g| and halve until the projected step decreases the model.
struct BacktrackingStep {
  double shrink = 0.5;
  int max_backtracks = 20;
};

template <typename Scalar>
struct SubproblemSettings {
  int pgd_max_iter = 20;
  Scalar pgd_tol = Scalar(1e-8);  // relative to delta
  std::variant<BacktrackingStep, FixedStep> step_size_rule = BacktrackingStep{};
  Scalar kappa_tr = Scalar(0.5);
  int cauchy_max_halvings = 30;
  ProjectionSettings<Scalar> projection;

  void validate() const {
    detail::require(pgd_max_iter >= 1, "SubproblemSettings: pgd_max_iter must be >= 1");
    detail::require(pgd_tol > Scalar(0), "SubproblemSettings: pgd_tol must be positive");
    detail::require(kappa_tr > Scalar(0) && kappa_tr < Scalar(1), "SubproblemSettings: kappa_tr must be in (0,1)");
    if (const auto* bt = std::get_if<BacktrackingStep>(&step_size_rule)) {
      detail::require(bt->shrink > 0 && bt->shrink < 1, "SubproblemSettings: shrink must be in (0,1)");
      detail::require(bt->max_backtracks >= 0, "SubproblemSettings: negative max_backtracks");
    } else {
      detail::require(std::get<FixedStep>(step_size_rule).t > 0, "SubproblemSettings: fixed step must be positive");
    }
    projection.validate();
  }
};

template <typename Scalar>
struct SubproblemResult {
  Vector<Scalar> s_hat;
  Scalar model_decrease = Scalar(0);  // m(0) - m(s_hat)
  bool cauchy_ok = true;
  int pgd_iterations = 0;
};

/// Sufficient decrease required of a subproblem solution with a linear model
/// (model Hessian norm 0).
template <typename Scalar>
Scalar cauchy_decrease_bound(Scalar pi_m, Scalar delta, Scalar kappa_tr) {
  return kappa_tr * pi_m * std::min({pi_m, delta, Scalar(1)});
}

/// Approximately minimizes the linear model over {|s| <= delta} ∩ Q^T((C - x) ∩ col(Q))
/// by projected gradient descent, safeguarded by the projected-gradient path
/// (generalized Cauchy) points proj_F(-tau g).
template <typename Scalar>
SubproblemResult<Scalar> solve_subproblem(const LinearSubspaceModel<Scalar>& model, Scalar delta,
                                          const ConvexSet<Scalar>& set, Scalar pi_m,
                                          const SubproblemSettings<Scalar>& settings = {}) {
  detail::require(delta > Scalar(0), "solve_subproblem: delta must be positive");
  detail::require_dims(set.dimension(), model.Q.rows(), "solve_subproblem");
  settings.validate();

  const Eigen::Index p = model.subspace_dim();
  const Vector<Scalar>& g = model.gradient;
  const Scalar g_norm = g.norm();

  SubproblemResult<Scalar> result;
  result.s_hat = Vector<Scalar>::Zero(p);
  if (pi_m <= Scalar(0) || g_norm <= Scalar(0)) return result;

  const Matrix<Scalar>& Q = model.Q;
  const ConvexSet<Scalar> shifted = set.translated(model.center);
  // F sits inside col(Q), where |Q s| = |s|, so the trust-region ball is projected in ambient space
  std::vector<Projector<Scalar>> ball{[delta](const Vector<Scalar>& v) -> Vector<Scalar> {
    const Scalar r = v.norm();
    return r <= delta ? v : Vector<Scalar>(v * (delta / r));
  }};
  const Scalar feas_tol = settings.projection.dykstra_tol;
  auto inside = [&](const Vector<Scalar>& s) { return contains(shifted, Vector<Scalar>(Q * s), feas_tol); };
  auto project_F = [&](const Vector<Scalar>& s) -> Vector<Scalar> {
    const auto r = detail::project_onto_subspace_slice<Scalar>(shifted, Q, Q * s, ball, settings.projection);
    Vector<Scalar> out = Q.transpose() * r.point;
    if (inside(out)) return out;
    // Dykstra stalls on thin slices; F is convex and contains 0, so back off
    // along the segment to the last feasible point
    Scalar lo(0), hi(1);
    for (int b = 0; b < 60 && hi - lo > Scalar(1e-14); ++b) {
      const Scalar mid = Scalar(0.5) * (lo + hi);
      (inside(Vector<Scalar>(mid * out)) ? lo : hi) = mid;
    }
    return Vector<Scalar>(lo * out);
  };
  auto model_change = [&](const Vector<Scalar>& s) { return g.dot(s); };  // m(s) - m(0)

  // projected gradient descent from s = 0
  Vector<Scalar> s = Vector<Scalar>::Zero(p);
  const Scalar tol = settings.pgd_tol * delta;
  for (int it = 0; it < settings.pgd_max_iter; ++it) {
    Vector<Scalar> candidate;
    bool improved = false;
    if (const auto* fixed = std::get_if<FixedStep>(&settings.step_size_rule)) {
      candidate = project_F(s - static_cast<Scalar>(fixed->t) * g);
      improved = model_change(candidate) < model_change(s);
    } else {
      const auto& bt = std::get<BacktrackingStep>(settings.step_size_rule);
      Scalar t = delta / g_norm;
      for (int b = 0; b <= bt.max_backtracks; ++b) {
        candidate = project_F(s - t * g);
        if (model_change(candidate) < model_change(s)) {
          improved = true;
          break;
        }
        t *= static_cast<Scalar>(bt.shrink);
      }
    }
    result.pgd_iterations = it + 1;
    if (!improved) break;
    const Scalar moved = (candidate - s).norm();
    s = std::move(candidate);
    if (moved <= tol) break;
  }

  // Cauchy safeguard along the projected-gradient path
  const Scalar required = cauchy_decrease_bound(pi_m, delta, settings.kappa_tr);
  Vector<Scalar> best = s;
  Scalar tau = delta / g_norm;
  for (int h = 0; h <= settings.cauchy_max_halvings; ++h) {
    const Vector<Scalar> c = project_F(-tau * g);
    if (model_change(c) < model_change(best)) best = c;
    if (-model_change(best) >= required) break;
    tau *= Scalar(0.5);
  }

  if (model_change(best) > Scalar(0)) best.setZero();
  result.s_hat = std::move(best);
  result.model_decrease = std::max(Scalar(0), -model_change(result.s_hat));
  result.cauchy_ok = result.model_decrease >= required;
  return result;
}

}  // namespace clarsta
