#pragma once

// Huber M-estimation of scalar locations: columnwise means, the second moment
// of the scale variable xi, and pairwise second moments.

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

#include "robcov/panel.hpp"

namespace robcov {

template <typename Scalar>
constexpr Scalar huber_psi(Scalar x, Scalar h) {
  return std::min(h, std::max(-h, x));
}

enum class HuberRule {
  location,  // h = c * sqrt(n / log p)
  moment,    // h = c * n^{min(1 / (1 + eps / 2), 1 / 2)}
  fixed,     // h given directly
};

struct HuberConfig {
  HuberRule rule = HuberRule::location;
  double constant = 1.0;
  double h = 0.0;        // used by HuberRule::fixed
  double epsilon = 1.0;  // tail index assumed by HuberRule::moment
  // When non-empty, `constant` is replaced by the grid value chosen by
  // K-fold cross-validation (see select_huber_constant).
  std::vector<double> cv_grid;
  int cv_folds = 5;

  static HuberConfig location_rule(double c = 1.0) {
    HuberConfig cfg;
    cfg.constant = c;
    return cfg;
  }
  static HuberConfig moment_rule(double c = 1.0, double epsilon = 1.0) {
    HuberConfig cfg;
    cfg.rule = HuberRule::moment;
    cfg.constant = c;
    cfg.epsilon = epsilon;
    return cfg;
  }
  static HuberConfig fixed_level(double h) {
    HuberConfig cfg;
    cfg.rule = HuberRule::fixed;
    cfg.h = h;
    return cfg;
  }
};

/// Truncation level for a sample of size n from a p-dimensional panel, using
/// `constant` in place of cfg.constant.
double resolve_h(const HuberConfig& cfg, Eigen::Index n, Eigen::Index p, double constant);
double resolve_h(const HuberConfig& cfg, Eigen::Index n, Eigen::Index p);

/// Root of g(m) = sum_t psi_h(z_t - m). g is continuous and non-increasing,
/// and the root lies in [min z - h, max z + h]. The bracket is bisected
/// while the exact root of the current linear piece is tried at every step,
/// so the result has |g| <= n * 1e-12 or a bracket narrower than
/// 1e-12 * (1 + |m|).
double huber_location(const Eigen::Ref<const Eigen::VectorXd>& samples, double h);

/// Picks the constant from cfg.cv_grid minimizing the mean out-of-fold
/// |(1/n_test) sum psi_h(z - m_train)| over all columns of `series`.
/// Folds are contiguous blocks. Ties go to the smaller constant.
double select_huber_constant(const Eigen::MatrixXd& series, const HuberConfig& cfg, Eigen::Index p);

/// Columnwise Huber location.
Eigen::VectorXd huber_mean_vector(const ReturnsPanel& panel, const HuberConfig& cfg);

/// Huber location of w_t = ||y_t - mu_hat||^2 / p, an estimate of E(xi^2).
double estimate_xi2(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                    const HuberConfig& cfg);

/// Entry (i, j) is the Huber location of (y_it - mu_i)(y_jt - mu_j).
Eigen::MatrixXd huber_pairwise_moment(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                                      const HuberConfig& cfg);

}  // namespace robcov
