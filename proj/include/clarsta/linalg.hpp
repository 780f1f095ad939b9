#pragma once

#include <algorithm>

#include "clarsta/types.hpp"

namespace clarsta {

/// Thin QR factors of an n x m matrix, m <= n.
template <typename Scalar>
struct ThinQR {
  Matrix<Scalar> Q;  // n x m, orthonormal columns
  Matrix<Scalar> R;  // m x m, upper triangular, nonnegative diagonal
};

/// Householder QR without pivoting. Column order of the input is preserved and
/// the diagonal of R is made nonnegative by flipping the matching Q columns, so
/// the factorization is unique for full-rank input.
template <typename Derived>
ThinQR<typename Derived::Scalar> thin_qr(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = A.rows();
  const Eigen::Index m = A.cols();
  detail::require(m <= n, "thin_qr: more columns than rows");

  ThinQR<Scalar> out;
  if (m == 0) {
    out.Q.resize(n, 0);
    out.R.resize(0, 0);
    return out;
  }
  Eigen::HouseholderQR<Matrix<Scalar>> qr(A.eval());
  out.Q = qr.householderQ() * Matrix<Scalar>::Identity(n, m);
  out.R = qr.matrixQR().topRows(m).template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (out.R(i, i) < Scalar(0)) {
      out.R.row(i) *= Scalar(-1);
      out.Q.col(i) *= Scalar(-1);
    }
  }
  return out;
}

/// Smallest singular value. An n x 0 matrix has sigma_min 0 and a single column
/// has sigma_min equal to its norm.
template <typename Derived>
typename Derived::Scalar sigma_min(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  if (M.cols() == 0 || M.rows() == 0) return Scalar(0);
  if (M.cols() == 1) return M.col(0).norm();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M.eval());
  const auto& s = svd.singularValues();
  // a wide matrix has at least cols - rows zero singular values
  if (M.cols() > M.rows()) return Scalar(0);
  return s(s.size() - 1);
}

/// Spectral norm (largest singular value).
template <typename Derived>
typename Derived::Scalar sigma_max(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  if (M.cols() == 0 || M.rows() == 0) return Scalar(0);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M.eval());
  return svd.singularValues()(0);
}

/// max |(Q^T Q - I)_ij|
template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& Q) {
  using Scalar = typename Derived::Scalar;
  if (Q.cols() == 0) return Scalar(0);
  const Matrix<Scalar> gram = Q.transpose() * Q;
  return (gram - Matrix<Scalar>::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff();
}

}  // namespace clarsta
