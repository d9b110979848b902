#pragma once

// Idiosyncratic-projected self-normalization (IPSN) pilots.
//
// The spatial Kendall's tau matrix gives robust leading eigenvectors. Each
// centered observation is divided by the length of its projection onto their
// orthogonal complement, which removes the heavy-tailed scale xi_t even when
// strong factors are present. The trace-normalized second moment of the
// normalized rows is the pilot scatter.

#include <Eigen/Dense>

#include <optional>

#include "robcov/panel.hpp"
#include "robcov/robust_scalar.hpp"

namespace robcov {

/// Average of unit-trace rank-one projectors of pairwise differences.
struct KendallTau {
  Eigen::MatrixXd matrix;
  Eigen::Index pairs_used = 0;
};

/// (p - K) x p matrix with orthonormal rows spanning the complement of the
/// estimated factor directions.
struct Projection {
  Eigen::MatrixXd matrix;
};

enum class PilotScale { scatter, covariance };

struct PilotSet {
  Eigen::MatrixXd scatter;
  Eigen::VectorXd eigvals;   // K leading, descending
  Eigen::MatrixXd eigvecs;   // p x K, sign-fixed
  Eigen::VectorXd location;  // centre used to build the pilot
  double eta_hat = 1.0;      // sqrt(eta_hat) * x_hat rows are on the scatter's scale
  Eigen::VectorXd xi_hat;    // empty for benchmark pilots
  PilotScale scale = PilotScale::scatter;
  std::optional<double> implied_xi2;  // set by normalize_to_scatter

  Eigen::Index p() const noexcept { return scatter.rows(); }
  Eigen::Index k() const noexcept { return eigvals.size(); }
};

KendallTau spatial_kendall_tau(const ReturnsPanel& panel);

/// Default search bound for estimate_num_factors: floor(min(p, n) / 2),
/// capped at 15 and at p - 2, and at least 1.
Eigen::Index default_k_max(Eigen::Index p, Eigen::Index n);

/// argmax over 1 <= k <= k_max of lambda_k / lambda_{k+1} of the tau matrix;
/// ties go to the smallest k. A non-positive denominator counts as an
/// infinite ratio.
Eigen::Index estimate_num_factors(const KendallTau& tau, Eigen::Index k_max);

Projection idiosyncratic_projection(const Eigen::MatrixXd& gamma_ed);

/// Row t is sqrt(p) (y_t - mu) / ||P (y_t - mu)||.
Eigen::MatrixXd ipsn_normalize(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                               const Projection& proj);

/// scatter = (eta / n) sum x_t x_t' with eta = p / tr(sum x_t x_t' / n), so
/// tr(scatter) = p; xi_hat_t = ||P (y_t - mu)|| / sqrt(p * eta), so that
/// (y_t - mu) / xi_hat_t = sqrt(eta) x_t.
PilotSet pilot_scatter(const Eigen::MatrixXd& x_hat, Eigen::Index k, const Projection& proj,
                       const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat);

struct IpsnOptions {
  HuberConfig location = HuberConfig::location_rule();
};

/// Everything the IPSN construction produces, kept for diagnostics.
struct IpsnPilots {
  Eigen::VectorXd mu_hat;
  KendallTau tau;
  Eigen::MatrixXd gamma_ed;
  Projection projection;
  Eigen::MatrixXd x_hat;
  PilotSet pilot;
};

/// Huber location, Kendall eigenvectors, projection, normalization and pilot
/// scatter in one call. `tau` may be supplied when already computed for the
/// same panel.
IpsnPilots fit_ipsn_pilots(const ReturnsPanel& panel, Eigen::Index k,
                           const IpsnOptions& options = {},
                           const KendallTau* tau = nullptr);

}  // namespace robcov
