#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace t3s {

/// Cosine similarity clamped to [-1, 1]; 0 when either argument is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return std::clamp<Scalar>(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

/// Row-wise cosine matrix between the rows of A and B, zero rows giving 0.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> cosine_matrix(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  auto inv_norms = [](const auto& M) {
    Vec n = M.rowwise().norm();
    return n.unaryExpr([](Scalar x) { return x == Scalar(0) ? Scalar(0) : Scalar(1) / x; }).eval();
  };
  const Vec ia = inv_norms(A);
  const Vec ib = inv_norms(B);
  Mat C = ia.asDiagonal() * (A * B.transpose()) * ib.asDiagonal();
  return C.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// Mean over dimensions of the population variance across the rows.
/// Empty and single-row sets have variance 0.
template <typename Derived>
typename Derived::Scalar mean_feature_variance(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  if (rows.rows() < 2 || rows.cols() == 0) return Scalar(0);
  const auto mean = rows.colwise().mean();
  const auto centered = rows.rowwise() - mean;
  return centered.squaredNorm() / Scalar(rows.rows() * rows.cols());
}

}  // namespace t3s
