#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "clarsta/linalg.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

template <typename Scalar>
struct ProjectionSettings {
  Scalar dykstra_tol = Scalar(1e-10);  // max per-set iterate change over one sweep
  int dykstra_max_iter = 1000;          // sweeps

  void validate() const {
    detail::require(dykstra_tol > Scalar(0), "ProjectionSettings: dykstra_tol must be positive");
    detail::require(dykstra_max_iter >= 1, "ProjectionSettings: dykstra_max_iter must be >= 1");
  }
};

template <typename Scalar>
struct ProjectionResult {
  Vector<Scalar> point;
  bool converged = true;
  int iterations = 0;
};

enum class HalfspaceSense { LessEqual, GreaterEqual };

template <typename Scalar>
class ConvexSet {
 public:
  struct Box {
    Vector<Scalar> lower, upper;
  };
  struct Ball {
    Vector<Scalar> center;
    Scalar radius;
  };
  /// Canonical form normal^T x <= offset.
  struct Halfspace {
    Vector<Scalar> normal;
    Scalar offset;
  };
  struct Intersection {
    std::vector<ConvexSet> members;
  };
  struct WholeSpace {
    Eigen::Index dim;
  };
  using Variant = std::variant<Box, Ball, Halfspace, Intersection, WholeSpace>;

  static ConvexSet box(Vector<Scalar> lower, Vector<Scalar> upper) {
    detail::require(lower.size() == upper.size(), "Box: lower and upper differ in size");
    detail::require(lower.size() > 0, "Box: empty dimension");
    bool some_strict = false;
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      detail::require(lower(i) <= upper(i), "Box: lower must not exceed upper");
      some_strict = some_strict || lower(i) < upper(i);
    }
    detail::require(some_strict, "Box: degenerate (lower == upper everywhere)");
    return ConvexSet(Box{std::move(lower), std::move(upper)});
  }

  static ConvexSet ball(Vector<Scalar> center, Scalar radius) {
    detail::require(radius > Scalar(0), "Ball: radius must be positive");
    detail::require(center.size() > 0, "Ball: empty dimension");
    return ConvexSet(Ball{std::move(center), radius});
  }

  static ConvexSet halfspace(Vector<Scalar> normal, Scalar offset,
                             HalfspaceSense sense = HalfspaceSense::LessEqual) {
    detail::require(normal.size() > 0, "Halfspace: empty dimension");
    detail::require(normal.squaredNorm() > Scalar(0), "Halfspace: zero normal");
    if (sense == HalfspaceSense::GreaterEqual) {
      normal = -normal;
      offset = -offset;
    }
    return ConvexSet(Halfspace{std::move(normal), offset});
  }

  static ConvexSet intersection(std::vector<ConvexSet> members) {
    detail::require(!members.empty(), "Intersection: no members");
    const Eigen::Index n = members.front().dimension();
    for (const auto& m : members) detail::require_dims(n, m.dimension(), "Intersection member");
    return ConvexSet(Intersection{std::move(members)});
  }

  static ConvexSet whole_space(Eigen::Index n) {
    detail::require(n > 0, "WholeSpace: empty dimension");
    return ConvexSet(WholeSpace{n});
  }

  Eigen::Index dimension() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return s.lower.size();
          else if constexpr (std::is_same_v<T, Ball>) return s.center.size();
          else if constexpr (std::is_same_v<T, Halfspace>) return s.normal.size();
          else if constexpr (std::is_same_v<T, Intersection>) return s.members.front().dimension();
          else return s.dim;
        },
        variant_);
  }

  bool is_intersection() const { return std::holds_alternative<Intersection>(variant_); }
  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(variant_); }

  const Variant& variant() const { return variant_; }

  /// The set C - shift.
  ConvexSet translated(const Vector<Scalar>& shift) const {
    detail::require_dims(dimension(), shift.size(), "translated");
    return std::visit(
        [&](const auto& s) -> ConvexSet {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            return ConvexSet(Box{s.lower - shift, s.upper - shift});
          } else if constexpr (std::is_same_v<T, Ball>) {
            return ConvexSet(Ball{s.center - shift, s.radius});
          } else if constexpr (std::is_same_v<T, Halfspace>) {
            return ConvexSet(Halfspace{s.normal, s.offset - s.normal.dot(shift)});
          } else if constexpr (std::is_same_v<T, Intersection>) {
            std::vector<ConvexSet> moved;
            moved.reserve(s.members.size());
            for (const auto& m : s.members) moved.push_back(m.translated(shift));
            return ConvexSet(Intersection{std::move(moved)});
          } else {
            return *this;
          }
        },
        variant_);
  }

  /// Nested intersections expanded into a flat member list; other sets yield themselves.
  void flatten_into(std::vector<ConvexSet>& out) const {
    if (const auto* inter = std::get_if<Intersection>(&variant_)) {
      for (const auto& m : inter->members) m.flatten_into(out);
    } else {
      out.push_back(*this);
    }
  }

 private:
  explicit ConvexSet(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

template <typename Scalar>
using Projector = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

namespace detail {

template <typename Scalar>
Vector<Scalar> project_closed_form(const ConvexSet<Scalar>& set, const Vector<Scalar>& x) {
  using Set = ConvexSet<Scalar>;
  return std::visit(
      [&](const auto& s) -> Vector<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, typename Set::Box>) {
          return x.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<T, typename Set::Ball>) {
          const Vector<Scalar> offset = x - s.center;
          const Scalar dist = offset.norm();
          if (dist <= s.radius) return x;
          return s.center + (s.radius / dist) * offset;
        } else if constexpr (std::is_same_v<T, typename Set::Halfspace>) {
          const Scalar violation = s.normal.dot(x) - s.offset;
          if (violation <= Scalar(0)) return x;
          return x - (violation / s.normal.squaredNorm()) * s.normal;
        } else if constexpr (std::is_same_v<T, typename Set::WholeSpace>) {
          return x;
        } else {
          throw std::logic_error("project_closed_form: intersection has no closed form");
        }
      },
      set.variant());
}

/// Dykstra's alternating projections with one correction term per set. Sets are
/// swept in the given order; the result is the output of the last projector.
template <typename Scalar>
ProjectionResult<Scalar> dykstra(std::span<const Projector<Scalar>> projectors,
                                 const Vector<Scalar>& start,
                                 const ProjectionSettings<Scalar>& settings) {
  const std::size_t m = projectors.size();
  Vector<Scalar> x = start;
  std::vector<Vector<Scalar>> correction(m, Vector<Scalar>::Zero(start.size()));
  std::vector<Vector<Scalar>> previous(m, start);

  ProjectionResult<Scalar> result;
  result.converged = false;
  for (int sweep = 1; sweep <= settings.dykstra_max_iter; ++sweep) {
    Scalar displacement(0);
    for (std::size_t i = 0; i < m; ++i) {
      const Vector<Scalar> shifted = x + correction[i];
      Vector<Scalar> z = projectors[i](shifted);
      correction[i] = shifted - z;
      displacement = std::max(displacement, (z - previous[i]).norm());
      previous[i] = z;
      x = std::move(z);
    }
    result.iterations = sweep;
    if (displacement <= settings.dykstra_tol) {
      result.converged = true;
      break;
    }
  }
  result.point = std::move(x);
  return result;
}

template <typename Scalar>
std::vector<Projector<Scalar>> member_projectors(const ConvexSet<Scalar>& set) {
  std::vector<ConvexSet<Scalar>> flat;
  set.flatten_into(flat);
  std::vector<Projector<Scalar>> out;
  out.reserve(flat.size());
  for (auto& member : flat) {
    if (member.is_whole_space()) continue;
    out.push_back([member](const Vector<Scalar>& v) { return project_closed_form(member, v); });
  }
  return out;
}

}  // namespace detail

/// Euclidean projection with convergence status. Closed-form sets always report
/// converged with zero iterations.
template <typename Scalar>
ProjectionResult<Scalar> project_with_status(const ConvexSet<Scalar>& set, const Vector<Scalar>& point,
                                             const ProjectionSettings<Scalar>& settings = {}) {
  detail::require_dims(set.dimension(), point.size(), "project");
  if (!set.is_intersection()) return {detail::project_closed_form(set, point), true, 0};
  settings.validate();
  const auto projectors = detail::member_projectors(set);
  if (projectors.empty()) return {point, true, 0};
  if (projectors.size() == 1) return {projectors.front()(point), true, 0};
  return detail::dykstra<Scalar>(projectors, point, settings);
}

template <typename Scalar>
Vector<Scalar> project(const ConvexSet<Scalar>& set, const Vector<Scalar>& point,
                       const ProjectionSettings<Scalar>& settings = {}) {
  return project_with_status(set, point, settings).point;
}

/// True iff every constraint residual of `point` is at most `tol`.
template <typename Scalar>
bool contains(const ConvexSet<Scalar>& set, const Vector<Scalar>& point, Scalar tol = Scalar(0)) {
  detail::require_dims(set.dimension(), point.size(), "contains");
  using Set = ConvexSet<Scalar>;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, typename Set::Box>) {
          for (Eigen::Index i = 0; i < point.size(); ++i) {
            if (s.lower(i) - point(i) > tol || point(i) - s.upper(i) > tol) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, typename Set::Ball>) {
          return (point - s.center).norm() - s.radius <= tol;
        } else if constexpr (std::is_same_v<T, typename Set::Halfspace>) {
          return s.normal.dot(point) - s.offset <= tol;
        } else if constexpr (std::is_same_v<T, typename Set::Intersection>) {
          return std::all_of(s.members.begin(), s.members.end(),
                             [&](const auto& m) { return contains(m, point, tol); });
        } else {
          return true;
        }
      },
      set.variant());
}

/// Dykstra projection onto the intersection of `sets`, swept in the given order.
template <typename Scalar>
ProjectionResult<Scalar> dykstra_project(std::span<const ConvexSet<Scalar>> sets, const Vector<Scalar>& point,
                                         const ProjectionSettings<Scalar>& settings = {}) {
  detail::require(sets.size() >= 2, "dykstra_project: need at least two sets");
  settings.validate();
  std::vector<Projector<Scalar>> projectors;
  for (const auto& s : sets) {
    detail::require_dims(s.dimension(), point.size(), "dykstra_project");
    if (s.is_intersection()) {
      projectors.push_back([s, settings](const Vector<Scalar>& v) { return project(s, v, settings); });
    } else {
      projectors.push_back([s](const Vector<Scalar>& v) { return detail::project_closed_form(s, v); });
    }
  }
  return detail::dykstra<Scalar>(projectors, point, settings);
}

template <typename Scalar>
ProjectionResult<Scalar> dykstra_project(const std::vector<ConvexSet<Scalar>>& sets, const Vector<Scalar>& point,
                                         const ProjectionSettings<Scalar>& settings = {}) {
  return dykstra_project(std::span<const ConvexSet<Scalar>>(sets), point, settings);
}

namespace detail {

template <typename Scalar>
void require_orthonormal(const Matrix<Scalar>& Q, const char* what) {
  if (orthonormality_error(Q) > Scalar(1e-10)) {
    throw std::invalid_argument(std::string(what) + ": Q does not have orthonormal columns");
  }
}

/// Ambient-space Dykstra onto C ∩ col(Q) (plus optional extra sets), with the
/// subspace projector last so the result lies exactly in col(Q).
template <typename Scalar>
ProjectionResult<Scalar> project_onto_subspace_slice(const ConvexSet<Scalar>& set, const Matrix<Scalar>& Q,
                                                     const Vector<Scalar>& ambient_point,
                                                     std::vector<Projector<Scalar>> extra,
                                                     const ProjectionSettings<Scalar>& settings) {
  std::vector<Projector<Scalar>> projectors = member_projectors(set);
  for (auto& e : extra) projectors.push_back(std::move(e));
  projectors.push_back([&Q](const Vector<Scalar>& v) -> Vector<Scalar> { return Q * (Q.transpose() * v); });
  if (projectors.size() == 1) return {projectors.front()(ambient_point), true, 0};
  return dykstra<Scalar>(projectors, ambient_point, settings);
}

}  // namespace detail

/// Projection of s_hat onto Q^T (C ∩ col(Q)), computed as Q^T of the ambient
/// Dykstra projection of Q s_hat onto C ∩ col(Q).
template <typename Scalar>
Vector<Scalar> project_lifted(const ConvexSet<Scalar>& set, const Matrix<Scalar>& Q, const Vector<Scalar>& s_hat,
                              const ProjectionSettings<Scalar>& settings = {}) {
  detail::require_dims(set.dimension(), Q.rows(), "project_lifted");
  detail::require_dims(Q.cols(), s_hat.size(), "project_lifted");
  detail::require_orthonormal(Q, "project_lifted");
  settings.validate();
  const Vector<Scalar> lifted = Q * s_hat;
  const auto r = detail::project_onto_subspace_slice<Scalar>(set, Q, lifted, {}, settings);
  return Q.transpose() * r.point;
}

}  // namespace clarsta
