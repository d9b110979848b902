#pragma once

// Comparison pilots: a Huber covariance with Kendall's tau eigenvectors
// ("FLW-as-described"), and the plain sample covariance.

#include <Eigen/Dense>

#include "robcov/pilot_ipsn.hpp"
#include "robcov/robust_scalar.hpp"

namespace robcov {

/// Huber pairwise second moments about the Huber mean; eigenvalues from that
/// matrix, eigenvectors from spatial Kendall's tau. Covariance scale.
PilotSet flw_pilots(const ReturnsPanel& panel, Eigen::Index k, const HuberConfig& cfg,
                    const KendallTau* tau = nullptr);

/// Sample covariance about the sample mean with divisor n. Covariance scale.
PilotSet sample_pilots(const ReturnsPanel& panel, Eigen::Index k);

/// Rescales scatter, eigenvalues and eta by p / trace so that the trace is p,
/// and records trace / p as the implied E(xi^2).
PilotSet normalize_to_scatter(PilotSet pilot);

/// Eigenvalues and eigenvectors from different matrices can leave diagonal
/// entries of the residual at or below zero. Those entries are replaced by
/// the median residual diagonal; others are untouched. Throws
/// DegenerateDataError when the median itself is not positive.
Eigen::MatrixXd repair_residual_diagonal(Eigen::MatrixXd residual);

}  // namespace robcov
