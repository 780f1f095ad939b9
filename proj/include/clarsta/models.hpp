#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "clarsta/convex_sets.hpp"
#include "clarsta/linalg.hpp"
#include "clarsta/types.hpp"

namespace clarsta {

enum class ColumnOrigin { Reused, Random };

/// Where a sample direction came from, and the ledger entry holding f at its tip
/// (absent until the tip has been evaluated).
struct ColumnProvenance {
  ColumnOrigin origin = ColumnOrigin::Random;
  std::optional<std::size_t> ledger_index;
};

/// Sample directions D = QR around a center point.
template <typename Scalar>
struct DirectionMatrix {
  Matrix<Scalar> D;
  Matrix<Scalar> Q;
  Matrix<Scalar> R;
  Scalar diam_bar = Scalar(0);  // max column norm of R (= of D)
  std::vector<ColumnProvenance> provenance;

  Eigen::Index dim() const { return D.rows(); }
  Eigen::Index size() const { return D.cols(); }

  /// QR-factorizes D, verifying D = QR, Q^T Q = I and the diam_bar isometry.
  static DirectionMatrix factorize(Matrix<Scalar> D, std::vector<ColumnProvenance> provenance = {}) {
    detail::require(D.cols() >= 1, "DirectionMatrix: no columns");
    detail::require(D.cols() <= D.rows(), "DirectionMatrix: more columns than rows");
    if (provenance.empty()) provenance.resize(static_cast<std::size_t>(D.cols()));
    detail::require(provenance.size() == static_cast<std::size_t>(D.cols()),
                    "DirectionMatrix: provenance size mismatch");

    DirectionMatrix dm;
    auto qr = thin_qr(D);
    dm.Q = std::move(qr.Q);
    dm.R = std::move(qr.R);
    dm.D = std::move(D);
    dm.provenance = std::move(provenance);

    const Scalar d_norm = dm.D.norm();
    if (d_norm > Scalar(0) && (dm.D - dm.Q * dm.R).norm() > Scalar(1e-10) * d_norm) {
      throw DegenerateGeometry("DirectionMatrix: QR reconstruction failed");
    }
    if (orthonormality_error(dm.Q) > Scalar(1e-10)) {
      throw DegenerateGeometry("DirectionMatrix: Q lost orthonormality");
    }
    dm.diam_bar = dm.R.colwise().norm().maxCoeff();
    const Scalar from_d = dm.D.colwise().norm().maxCoeff();
    if (std::abs(dm.diam_bar - from_d) > Scalar(1e-10) * std::max(Scalar(1), from_d)) {
      throw DegenerateGeometry("DirectionMatrix: column norms of R and D disagree");
    }
    return dm;
  }
};

/// m(s) = constant + gradient^T s in subspace coordinates around `center`.
template <typename Scalar>
struct LinearSubspaceModel {
  Vector<Scalar> center;
  Matrix<Scalar> Q;
  Scalar constant = Scalar(0);
  Vector<Scalar> gradient;
  Scalar diam_bar = Scalar(0);

  Eigen::Index subspace_dim() const { return gradient.size(); }
};

template <typename Scalar>
struct FullyLinearConstants {
  Scalar kappa_ef;
  Scalar kappa_eg;
  Scalar M_R_inv;
  Scalar L_grad;
};

/// Generalized simplex gradient for an invertible R: solves R^T g = delta_f.
template <typename Scalar>
Vector<Scalar> simplex_gradient(const Vector<Scalar>& delta_f, const Matrix<Scalar>& R) {
  detail::require(R.rows() == R.cols(), "simplex_gradient: R must be square");
  detail::require_dims(R.rows(), delta_f.size(), "simplex_gradient");
  detail::require(R.rows() >= 1, "simplex_gradient: empty R");
  const Scalar diam = R.colwise().norm().maxCoeff();
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    if (!(std::abs(R(i, i)) >= Scalar(1e-14) * diam) || diam == Scalar(0)) {
      throw DegenerateGeometry("simplex_gradient: R is numerically singular");
    }
  }
  return R.transpose().template triangularView<Eigen::Lower>().solve(delta_f);
}

template <typename Scalar>
LinearSubspaceModel<Scalar> build_model(const Vector<Scalar>& center, const DirectionMatrix<Scalar>& dm,
                                        Scalar f_center, const Vector<Scalar>& f_at_tips) {
  detail::require_dims(dm.dim(), center.size(), "build_model center");
  detail::require_dims(dm.size(), f_at_tips.size(), "build_model tip values");
  const Vector<Scalar> delta_f = f_at_tips.array() - f_center;
  LinearSubspaceModel<Scalar> model;
  model.center = center;
  model.Q = dm.Q;
  model.constant = f_center;
  model.gradient = simplex_gradient(delta_f, dm.R);
  model.diam_bar = dm.diam_bar;
  if (!model.gradient.allFinite()) throw DegenerateGeometry("build_model: non-finite model gradient");
  return model;
}

template <typename Scalar>
Scalar eval_model(const LinearSubspaceModel<Scalar>& model, const Vector<Scalar>& s_hat) {
  detail::require_dims(model.subspace_dim(), s_hat.size(), "eval_model");
  return model.constant + model.gradient.dot(s_hat);
}

/// |v^T (proj_C(x - v/|v|) - x)|: one projected unit step along -v. Zero for
/// (numerically) zero v.
template <typename Scalar>
Scalar one_step_criticality(const Vector<Scalar>& v, const Vector<Scalar>& x, const ConvexSet<Scalar>& set,
                            const ProjectionSettings<Scalar>& settings = {}) {
  const Scalar norm = v.norm();
  if (norm <= Scalar(1e-14)) return Scalar(0);
  const Vector<Scalar> step = project(set, Vector<Scalar>(x - v / norm), settings) - x;
  return std::abs(v.dot(step));
}

/// Computable approximation of the model criticality measure at the model center.
template <typename Scalar>
Scalar criticality_approx(const LinearSubspaceModel<Scalar>& model, const ConvexSet<Scalar>& set,
                          const ProjectionSettings<Scalar>& settings = {}) {
  if (model.gradient.norm() <= Scalar(1e-14)) return Scalar(0);
  const Vector<Scalar> ambient = model.Q * model.gradient;
  return one_step_criticality(ambient, model.center, set, settings);
}

/// k-independent error constants for models kept by the sample-set rules.
template <typename Scalar>
FullyLinearConstants<Scalar> fully_linear_constants(Scalar L_grad, int p, Scalar eps_rad, Scalar eps_geo,
                                                    Scalar delta_min, Scalar delta_max) {
  detail::require(L_grad > 0 && p > 0 && eps_rad > 0 && eps_geo > 0 && delta_min > 0 && delta_max > 0,
                  "fully_linear_constants: inputs must be positive");
  detail::require(delta_min <= delta_max, "fully_linear_constants: delta_min > delta_max");
  detail::require(eps_rad >= Scalar(1), "fully_linear_constants: eps_rad < 1");
  FullyLinearConstants<Scalar> c;
  c.L_grad = L_grad;
  c.M_R_inv = std::max(Scalar(1) / eps_geo, Scalar(1) / delta_min) * eps_rad * delta_max;
  const Scalar root_p = std::sqrt(static_cast<Scalar>(p));
  c.kappa_ef = Scalar(0.5) * L_grad * (Scalar(1) + root_p * c.M_R_inv) * eps_rad * eps_rad;
  c.kappa_eg = Scalar(0.5) * L_grad * (Scalar(2) + root_p * c.M_R_inv) * eps_rad;
  return c;
}

/// Spectral norm, an upper bound on the constraint-restricted geometry measure.
template <typename Scalar>
Scalar geometry_norm_bound(const Matrix<Scalar>& M) {
  return sigma_max(M);
}

}  // namespace clarsta
