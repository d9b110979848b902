#pragma once

// Error measures for scatter/covariance estimates and the per-replication
// report built from them.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "robcov/datagen.hpp"
#include "robcov/linalg.hpp"
#include "robcov/pipeline.hpp"

namespace robcov {

namespace detail {
template <typename DA, typename DB>
void require_same_shape(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                        const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
  }
}
}  // namespace detail

template <typename DA, typename DB>
typename DA::Scalar max_norm_error(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  detail::require_same_shape(a, b, "max_norm_error");
  if (a.size() == 0) return typename DA::Scalar(0);
  return (a - b).cwiseAbs().maxCoeff();
}

/// Largest singular value of a - b; symmetric differences go through the
/// symmetric eigensolver.
template <typename DA, typename DB>
typename DA::Scalar spectral_norm_error(const Eigen::MatrixBase<DA>& a,
                                        const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  detail::require_same_shape(a, b, "spectral_norm_error");
  const MatrixX<Scalar> d = a - b;
  if (d.size() == 0) return Scalar(0);
  const Scalar asym = (d - d.transpose()).cwiseAbs().maxCoeff();
  if (d.rows() == d.cols() && asym <= Scalar(1e-12) * (Scalar(1) + d.cwiseAbs().maxCoeff())) {
    return symmetric_eigenvalues(d).cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(d);
  return svd.singularValues()(0);
}

/// ||S^{-1/2} (est - truth) S^{-1/2}||_F / sqrt(p) with S = truth, given
/// S^{-1/2} precomputed.
template <typename DA, typename DB>
typename DA::Scalar relative_frobenius_whitened(const Eigen::MatrixBase<DA>& est,
                                                const Eigen::MatrixBase<DB>& truth,
                                                const MatrixX<typename DA::Scalar>& truth_inv_sqrt) {
  using std::sqrt;
  detail::require_same_shape(est, truth, "relative_frobenius");
  const auto p = static_cast<typename DA::Scalar>(est.rows());
  return (truth_inv_sqrt * (est - truth) * truth_inv_sqrt).norm() / sqrt(p);
}

template <typename DA, typename DB>
typename DA::Scalar relative_frobenius(const Eigen::MatrixBase<DA>& est,
                                       const Eigen::MatrixBase<DB>& truth) {
  detail::require_same_shape(est, truth, "relative_frobenius");
  return relative_frobenius_whitened(est, truth, sym_inv_sqrt(truth));
}

/// sqrt(p) * max-norm difference after flipping each estimated column to have
/// a non-negative inner product with its truth column.
template <typename DA, typename DB>
typename DA::Scalar eigvec_error(const Eigen::MatrixBase<DA>& est, const Eigen::MatrixBase<DB>& truth) {
  using Scalar = typename DA::Scalar;
  using std::sqrt;
  detail::require_same_shape(est, truth, "eigvec_error");
  MatrixX<Scalar> aligned = est;
  for (Eigen::Index j = 0; j < aligned.cols(); ++j) {
    if (aligned.col(j).dot(truth.col(j)) < Scalar(0)) aligned.col(j) = -aligned.col(j);
  }
  return sqrt(static_cast<Scalar>(est.rows())) * max_norm_error(aligned, truth);
}

/// max_k |est_k / truth_k - 1|.
template <typename DA, typename DB>
typename DA::Scalar eigval_ratio_error(const Eigen::MatrixBase<DA>& est,
                                       const Eigen::MatrixBase<DB>& truth) {
  detail::require_same_shape(est, truth, "eigval_ratio_error");
  if ((truth.array() == 0).any()) throw std::invalid_argument("eigval_ratio_error: zero truth");
  if (est.size() == 0) return typename DA::Scalar(0);
  return (est.array() / truth.array() - 1).abs().maxCoeff();
}

/// (1/n) sum (xi_t^2 / xi_hat_t^2 - 1)^2.
template <typename DA, typename DB>
typename DA::Scalar xi_mse(const Eigen::MatrixBase<DA>& xi_hat, const Eigen::MatrixBase<DB>& xi) {
  detail::require_same_shape(xi_hat, xi, "xi_mse");
  if (!(xi_hat.array() > 0).all()) throw std::invalid_argument("xi_mse: xi_hat must be positive");
  return (xi.array().square() / xi_hat.array().square() - 1).square().mean();
}

/// Inverses and whitening factors of the truth, computed once per replication.
struct TruthReference {
  Eigen::MatrixXd sigma0_inv_sqrt;
  Eigen::MatrixXd sigma_inv_sqrt;
  Eigen::MatrixXd sigma0_inv;
  Eigen::MatrixXd sigma_inv;
  Eigen::MatrixXd sigma0_u_inv;
  Eigen::MatrixXd sigma_u_inv;

  explicit TruthReference(const ModelTruth& truth);
};

/// Metric identifiers in report order.
const std::vector<std::string>& pilot_metric_ids();
const std::vector<std::string>& poet_metric_ids();
const std::vector<std::string>& all_metric_ids();

struct MetricsReport {
  int replication = 0;
  std::string estimator;
  bool failed = false;
  std::string error;
  std::map<std::string, double> values;
};

/// Pilot and POET errors of `fit` against the truth.
MetricsReport evaluate(const Fit& fit, const ModelTruth& truth, const TruthReference& ref,
                       int replication);

/// Header and row for the per-replication CSV. Missing metrics are empty
/// cells; values use 17 significant digits.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

/// 17-significant-digit decimal rendering used by all CSV writers.
std::string format_full(double v);
/// Fixed 3-decimal rendering for summary tables.
std::string format_rounded(double v);

}  // namespace robcov
