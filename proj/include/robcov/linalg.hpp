#pragma once

// Dense symmetric kernels shared by every estimator: sign-fixed leading
// eigenpairs, spectra, and symmetric (inverse) square roots.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "robcov/error.hpp"

namespace robcov {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Leading eigenpairs, eigenvalues in descending order.
template <typename Scalar>
struct EigenPairs {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
};

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

/// Flips each column so that its largest-magnitude entry is positive. On ties
/// the first such entry decides.
template <typename Derived>
void fix_column_signs(Eigen::MatrixBase<Derived>& v) {
  using std::abs;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.rows(); ++i) {
      if (abs(v(i, j)) > abs(v(arg, j))) arg = i;
    }
    if (v(arg, j) < 0) v.col(j) = -v.col(j);
  }
}

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": expected a non-empty square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, const char* who) {
  using Scalar = typename Derived::Scalar;
  const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(1e-8) * (Scalar(1) + m.cwiseAbs().maxCoeff()))) {
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
  }
}

template <typename Matrix>
Eigen::SelfAdjointEigenSolver<Matrix> solve_symmetric(const Matrix& m, int options,
                                                      const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, options);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw NumericError(std::string(who) + ": symmetric eigensolver did not converge");
  }
  return es;
}

}  // namespace detail

/// All eigenvalues of the symmetrized input, descending.
template <typename Derived>
VectorX<typename Derived::Scalar> symmetric_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "symmetric_eigenvalues");
  const MatrixX<typename Derived::Scalar> s = symmetrized(m);
  auto es = detail::solve_symmetric(s, Eigen::EigenvaluesOnly, "symmetric_eigenvalues");
  return es.eigenvalues().reverse();
}

/// The k largest eigenpairs of a symmetric matrix. Columns are sign-fixed
/// with fix_column_signs so results are reproducible across calls.
template <typename Derived>
EigenPairs<typename Derived::Scalar> leading_eigvecs(const Eigen::MatrixBase<Derived>& m,
                                                     Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "leading_eigvecs");
  detail::require_symmetric(m, "leading_eigvecs");
  const Eigen::Index p = m.rows();
  if (k < 1 || k > p) {
    throw std::invalid_argument("leading_eigvecs: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(p) + "]");
  }
  const MatrixX<Scalar> s = symmetrized(m);
  auto es = detail::solve_symmetric(s, Eigen::ComputeEigenvectors, "leading_eigvecs");
  EigenPairs<Scalar> out;
  out.values = es.eigenvalues().tail(k).reverse();
  out.vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
  fix_column_signs(out.vectors);
  return out;
}

/// Symmetric PSD square root; eigenvalues below `clip` are treated as zero.
/// Throws NumericError when the input has a clearly negative eigenvalue.
template <typename Derived>
MatrixX<typename Derived::Scalar> sym_sqrt(const Eigen::MatrixBase<Derived>& m,
                                           typename Derived::Scalar clip = 1e-12) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "sym_sqrt");
  const MatrixX<Scalar> s = symmetrized(m);
  auto es = detail::solve_symmetric(s, Eigen::ComputeEigenvectors, "sym_sqrt");
  const auto& ev = es.eigenvalues();
  const Scalar scale = std::max(Scalar(1), ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -Scalar(1e-10) * scale) {
    throw NumericError("sym_sqrt: matrix is not positive semi-definite (min eigenvalue " +
                       std::to_string(static_cast<double>(ev.minCoeff())) + ")");
  }
  const VectorX<Scalar> root =
      ev.unaryExpr([clip](Scalar x) { return x < clip ? Scalar(0) : Scalar(std::sqrt(x)); });
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric inverse square root of a positive-definite matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> sym_inv_sqrt(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "sym_inv_sqrt");
  const MatrixX<Scalar> s = symmetrized(m);
  auto es = detail::solve_symmetric(s, Eigen::ComputeEigenvectors, "sym_inv_sqrt");
  if (!(es.eigenvalues().minCoeff() > Scalar(0))) {
    throw std::invalid_argument("sym_inv_sqrt: matrix is not positive definite");
  }
  const VectorX<Scalar> inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace robcov
