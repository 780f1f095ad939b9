#pragma once

#include <cmath>

#include "clarsta/convex_sets.hpp"
#include "clarsta/linalg.hpp"
#include "clarsta/models.hpp"
#include "clarsta/rng.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

/// n x q matrix of i.i.d. standard normals, filled column by column.
template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Eigen::Index n, Eigen::Index q, Rng& rng) {
  Matrix<Scalar> A(n, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = static_cast<Scalar>(rng.normal());
  return A;
}

/// q mutually orthogonal directions of length `delta`, orthogonal to the columns
/// of `existing_Q` when given. The Gaussian draw is repeated in full whenever
/// it is rank deficient after projection.
template <typename Scalar>
Matrix<Scalar> generate_directions(Eigen::Index n, Eigen::Index q, Scalar delta, const Matrix<Scalar>* existing_Q,
                                   Rng& rng) {
  detail::require(q >= 1, "generate_directions: q must be >= 1");
  detail::require(delta > Scalar(0), "generate_directions: delta must be positive");
  const Eigen::Index taken = existing_Q ? existing_Q->cols() : 0;
  if (existing_Q) {
    detail::require_dims(n, existing_Q->rows(), "generate_directions existing_Q");
    detail::require_orthonormal(*existing_Q, "generate_directions");
  }
  detail::require(taken + q <= n, "generate_directions: not enough room for orthogonal directions");

  for (;;) {
    Matrix<Scalar> A = gaussian_matrix<Scalar>(n, q, rng);
    if (existing_Q && taken > 0) {
      // two passes of classical Gram-Schmidt keep the residual orthogonal to working precision
      A -= *existing_Q * (existing_Q->transpose() * A);
      A -= *existing_Q * (existing_Q->transpose() * A);
    }
    const auto qr = thin_qr(A);
    if (qr.R.diagonal().cwiseAbs().minCoeff() < Scalar(1e-12)) continue;
    return delta * qr.Q;
  }
}

/// Q Q^T for Q the orthonormal factor of an n x z Gaussian matrix, i.e. a
/// uniformly distributed rank-z orthogonal projector.
template <typename Scalar>
Matrix<Scalar> sample_projection_matrix(Eigen::Index n, Eigen::Index z, Rng& rng) {
  detail::require(z >= 1 && z <= n, "sample_projection_matrix: need 1 <= z <= n");
  const Matrix<Scalar> Q = generate_directions<Scalar>(n, z, Scalar(1), nullptr, rng);
  return Q * Q.transpose();
}

/// Probability lower bound that a fresh random p-dimensional subspace is
/// alpha-well-aligned, given pi_f and |grad f| at the current point.
template <typename Scalar>
Scalar alignment_probability_bound(Eigen::Index n, Eigen::Index p, Scalar alpha, Scalar pi_f, Scalar grad_norm) {
  detail::require(n >= 1 && p >= 1 && p <= n, "alignment_probability_bound: need 1 <= p <= n");
  const Scalar ratio_pn = static_cast<Scalar>(p) / static_cast<Scalar>(n);
  detail::require(alpha > Scalar(0), "alignment_probability_bound: alpha must be positive");
  detail::require(alpha < ratio_pn, "alignment_probability_bound: alpha must be below p/n");
  detail::require(pi_f >= Scalar(0), "alignment_probability_bound: pi_f must be nonnegative");
  if (pi_f == Scalar(0)) return Scalar(1);
  detail::require(grad_norm > Scalar(0), "alignment_probability_bound: zero gradient with positive pi_f");
  const Scalar gap = ratio_pn - alpha;
  const Scalar ratio = pi_f / grad_norm;
  const Scalar exponent = (static_cast<Scalar>(n - 1) / Scalar(8)) * gap * gap * ratio * ratio;
  return std::clamp(Scalar(1) - std::exp(-exponent), Scalar(0), Scalar(1));
}

template <typename Scalar>
struct AlignmentReport {
  Scalar alpha;
  Scalar lhs;     // criticality captured by the subspace
  Scalar pi_f;    // full-space criticality
  bool aligned;
  Scalar bound;   // theoretical probability of alignment; 0 when alpha >= p/n
};

/// Checks whether col(Q) preserves at least alpha of the criticality measure at
/// x. Both sides use the same one-projected-step approximation.
template <typename Scalar>
AlignmentReport<Scalar> alignment_check(const Matrix<Scalar>& Q, const Vector<Scalar>& grad, const Vector<Scalar>& x,
                                        const ConvexSet<Scalar>& set, Scalar alpha,
                                        const ProjectionSettings<Scalar>& settings = {}) {
  detail::require_dims(Q.rows(), grad.size(), "alignment_check grad");
  detail::require_dims(Q.rows(), x.size(), "alignment_check x");
  detail::require_orthonormal(Q, "alignment_check");

  AlignmentReport<Scalar> report;
  report.alpha = alpha;
  const Vector<Scalar> projected = Q * (Q.transpose() * grad);
  report.lhs = one_step_criticality(projected, x, set, settings);
  report.pi_f = one_step_criticality(grad, x, set, settings);
  report.aligned = report.lhs >= alpha * report.pi_f - Scalar(1e-12);
  const Scalar ratio_pn = static_cast<Scalar>(Q.cols()) / static_cast<Scalar>(Q.rows());
  report.bound = (alpha > Scalar(0) && alpha < ratio_pn)
                     ? alignment_probability_bound(Q.rows(), Q.cols(), alpha, report.pi_f, grad.norm())
                     : Scalar(0);
  return report;
}

}  // namespace clarsta
