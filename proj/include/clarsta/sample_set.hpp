#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "clarsta/ledger.hpp"
#include "clarsta/linalg.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

/// x_k + d_i + d_j for one unordered pair of columns of [0 D]; index 0 is the
/// zero column, so (0, 0) is x_k itself and (0, i) the i-th tip.
template <typename Scalar>
struct PairPoint {
  int i;
  int j;
  Vector<Scalar> point;
};

/// Every pair point with i <= j. `tips[i]` is the stored point for column i
/// (the ledger entry the model used); pair points are built as tips[i] + d_j so
/// that the same point is reproduced bit for bit by every caller. When `tips`
/// is empty they are taken as x_k + d_i.
template <typename Scalar>
std::vector<PairPoint<Scalar>> pair_points(const Vector<Scalar>& x_k, const Matrix<Scalar>& D,
                                           const std::vector<Vector<Scalar>>& tips = {}) {
  detail::require_dims(x_k.size(), D.rows(), "pair_points");
  const int p = static_cast<int>(D.cols());
  detail::require(tips.empty() || tips.size() == static_cast<std::size_t>(p), "pair_points: tips size mismatch");
  auto tip = [&](int c) -> Vector<Scalar> {
    return tips.empty() ? Vector<Scalar>(x_k + D.col(c)) : tips[static_cast<std::size_t>(c)];
  };
  std::vector<PairPoint<Scalar>> out;
  out.push_back({0, 0, x_k});
  for (int i = 1; i <= p; ++i) out.push_back({0, i, tip(i - 1)});
  for (int i = 1; i <= p; ++i)
    for (int j = i; j <= p; ++j) out.push_back({i, j, Vector<Scalar>(tip(i - 1) + D.col(j - 1))});
  return out;
}

template <typename Scalar>
struct PoolEntry {
  Vector<Scalar> direction;  // ledger point minus x_next
  std::size_t ledger_index;
};

template <typename Scalar>
using CandidatePool = std::vector<PoolEntry<Scalar>>;

/// Directions from x_next to every already-evaluated point among the trial
/// point and the pair points of D_k. Entries are unique by ledger index and the
/// point x_next itself is left out.
template <typename Scalar>
CandidatePool<Scalar> build_candidate_pool(const Vector<Scalar>& x_k, const Vector<Scalar>& x_next,
                                           const std::optional<Vector<Scalar>>& trial_point,
                                           const Matrix<Scalar>& D_k, const EvaluationLedger<Scalar>& ledger,
                                           const std::vector<Vector<Scalar>>& tips = {}) {
  const auto next_index = ledger.find(x_next);
  std::vector<Vector<Scalar>> points;
  if (trial_point) points.push_back(*trial_point);
  for (auto& pp : pair_points(x_k, D_k, tips)) points.push_back(std::move(pp.point));

  CandidatePool<Scalar> pool;
  std::vector<std::size_t> seen;
  for (const auto& pt : points) {
    const auto idx = ledger.find(pt);
    if (!idx) continue;
    if (next_index && *idx == *next_index) continue;
    if (std::find(seen.begin(), seen.end(), *idx) != seen.end()) continue;
    seen.push_back(*idx);
    Vector<Scalar> direction = ledger[*idx].point - x_next;
    if (direction.squaredNorm() == Scalar(0)) continue;
    pool.push_back({std::move(direction), *idx});
  }
  return pool;
}

/// Sequentially deletes `count` columns, each time the one maximizing
/// theta_i = sigma_min(M_i) * max(|d_i|^4 / delta^4, 1), where M_i is the matrix
/// without column i. Ties go to the smallest index. Returns the surviving
/// column indices in their original order.
template <typename Scalar>
std::vector<int> remove_by_theta_indices(const Matrix<Scalar>& columns, Scalar delta, int count) {
  const int m = static_cast<int>(columns.cols());
  detail::require(count >= 0, "remove_by_theta: negative count");
  detail::require(count <= m, "remove_by_theta: count exceeds number of columns");
  detail::require(delta > Scalar(0), "remove_by_theta: delta must be positive");

  std::vector<int> kept(static_cast<std::size_t>(m));
  std::iota(kept.begin(), kept.end(), 0);
  const Scalar delta4 = delta * delta * delta * delta;
  for (int pass = 0; pass < count; ++pass) {
    const int cur = static_cast<int>(kept.size());
    int argmax = 0;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (int i = 0; i < cur; ++i) {
      Matrix<Scalar> rest(columns.rows(), cur - 1);
      for (int c = 0, out = 0; c < cur; ++c) {
        if (c != i) rest.col(out++) = columns.col(kept[static_cast<std::size_t>(c)]);
      }
      const Scalar norm = columns.col(kept[static_cast<std::size_t>(i)]).norm();
      const Scalar n4 = norm * norm * norm * norm;
      const Scalar theta = sigma_min(rest) * std::max(n4 / delta4, Scalar(1));
      if (theta > best) {
        best = theta;
        argmax = i;
      }
    }
    kept.erase(kept.begin() + argmax);
  }
  return kept;
}

template <typename Scalar>
Matrix<Scalar> remove_by_theta(const Matrix<Scalar>& columns, Scalar delta, int count) {
  const auto kept = remove_by_theta_indices(columns, delta, count);
  Matrix<Scalar> out(columns.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = columns.col(kept[c]);
  return out;
}

template <typename Scalar>
struct ReusableColumns {
  Matrix<Scalar> columns;                  // n x p1
  std::vector<std::size_t> ledger_indices;  // one per column
  Eigen::Index size() const { return columns.cols(); }
};

/// Picks the directions to carry into the next iteration: a shortest-first
/// greedy independent subset of at most p pool entries, then p_rand theta
/// removals, the radius filter, theta removals until sigma_min >= eps_geo, and
/// finally `extra_removals` more.
template <typename Scalar>
ReusableColumns<Scalar> select_reusable(const CandidatePool<Scalar>& pool, Eigen::Index n, Scalar delta_next, int p,
                                        int p_rand, Scalar eps_rad, Scalar eps_geo, int extra_removals = 0) {
  detail::require(eps_rad >= Scalar(1), "select_reusable: eps_rad < 1");
  detail::require(p_rand >= 1 && p_rand <= p, "select_reusable: need 1 <= p_rand <= p");
  detail::require(extra_removals >= 0, "select_reusable: negative extra_removals");

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Scalar> norms(pool.size());
  for (std::size_t e = 0; e < pool.size(); ++e) {
    detail::require_dims(n, pool[e].direction.size(), "select_reusable pool entry");
    norms[e] = pool[e].direction.norm();
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (norms[a] != norms[b]) return norms[a] < norms[b];
    return pool[a].ledger_index < pool[b].ledger_index;
  });

  // greedy selection against an orthonormal basis of the accepted span
  std::vector<std::size_t> chosen;
  Matrix<Scalar> basis(n, 0);
  for (std::size_t e : order) {
    if (static_cast<int>(chosen.size()) >= p) break;
    Vector<Scalar> r = pool[e].direction;
    if (basis.cols() > 0) {
      r -= basis * (basis.transpose() * r);
      r -= basis * (basis.transpose() * r);
    }
    const Scalar rn = r.norm();
    if (rn < Scalar(1e-12) * std::max(Scalar(1), norms[e])) continue;
    chosen.push_back(e);
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = r / rn;
  }

  ReusableColumns<Scalar> out;
  out.columns.resize(n, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    out.columns.col(static_cast<Eigen::Index>(c)) = pool[chosen[c]].direction;
    out.ledger_indices.push_back(pool[chosen[c]].ledger_index);
  }

  auto apply_keep = [&out](const std::vector<int>& kept) {
    ReusableColumns<Scalar> next;
    next.columns.resize(out.columns.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      next.columns.col(static_cast<Eigen::Index>(c)) = out.columns.col(kept[c]);
      next.ledger_indices.push_back(out.ledger_indices[static_cast<std::size_t>(kept[c])]);
    }
    out = std::move(next);
  };
  auto remove = [&](int count) {
    count = std::min(count, static_cast<int>(out.size()));
    if (count > 0) apply_keep(remove_by_theta_indices(out.columns, delta_next, count));
  };

  remove(p_rand);

  std::vector<int> within_radius;
  for (int c = 0; c < static_cast<int>(out.size()); ++c) {
    if (out.columns.col(c).norm() <= eps_rad * delta_next) within_radius.push_back(c);
  }
  apply_keep(within_radius);

  while (out.size() > 0 && sigma_min(out.columns) < eps_geo) remove(1);

  remove(extra_removals);
  return out;
}

}  // namespace clarsta
