#pragma once

// Generic POET: low-rank part from the pilot's leading eigenpairs plus an
// adaptively soft-thresholded principal orthogonal complement.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "robcov/pilot_ipsn.hpp"

namespace robcov {

struct PoetEstimate {
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd idio;
  Eigen::MatrixXd idio_inverse;
  Eigen::MatrixXd full;
  Eigen::MatrixXd full_inverse;  // Woodbury
  PilotScale scale = PilotScale::scatter;
  double threshold_constant = 0.0;
  double omega_n = 0.0;
  bool threshold_fallback = false;  // no grid constant gave a PD idio
};

struct PoetPair {
  PoetEstimate scatter;
  std::optional<PoetEstimate> covariance;
};

struct ThresholdRule {
  enum class Kind { min_pd, fixed };
  Kind kind = Kind::min_pd;
  double constant = 0.5;      // Kind::fixed
  std::vector<double> grid;   // Kind::min_pd; empty means default_threshold_grid()
  // Kind::min_pd: grid values below this are never chosen. The boundary
  // constant leaves most sampling noise in the off-diagonals.
  double floor = 1.0;

  static ThresholdRule fixed_constant(double c) {
    ThresholdRule rule;
    rule.kind = Kind::fixed;
    rule.constant = c;
    return rule;
  }
};

struct ThresholdChoice {
  double constant = 0.0;
  bool fallback = false;
};

/// {0.25, 0.5, ..., 3.0}.
std::vector<double> default_threshold_grid();

/// sqrt(log p / p) + sqrt(log p / n), natural log.
double omega_rate(Eigen::Index p, Eigen::Index n);

/// scatter - G diag(lambda) G'.
Eigen::MatrixXd residual_matrix(const PilotSet& pilot);

/// theta_ij = (1/n) sum_t (u_it u_jt - R_ij)^2 for the residual samples
/// u_t = (I - G G') sqrt(eta) x_t, clamped at zero.
Eigen::MatrixXd estimate_theta(const Eigen::MatrixXd& x_hat, const PilotSet& pilot);

/// Off-diagonal soft thresholding at c * omega_n * sqrt(theta_ij); the
/// diagonal is copied unchanged.
Eigen::MatrixXd adaptive_threshold(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& theta,
                                   double c, double omega_n);

/// Smallest grid constant whose thresholded residual has minimum eigenvalue
/// above 1e-8 * trace / p. Falls back to the largest grid value (with
/// `fallback` set) when none qualifies.
ThresholdChoice min_pd_constant(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& theta,
                                double omega_n, const std::vector<double>& grid);

/// Low-rank part plus `idio`; the inverse uses the Woodbury identity. With
/// e_xi2, the covariance-scale estimate e_xi2 * (scatter estimate) is added.
PoetPair assemble_poet(const PilotSet& pilot, const Eigen::MatrixXd& idio,
                       std::optional<double> e_xi2 = std::nullopt);

/// Residual, theta, threshold choice and assembly. When min_pd finds no
/// qualifying constant, the idiosyncratic part is the residual's diagonal.
PoetPair fit_poet(const PilotSet& pilot, const Eigen::MatrixXd& x_hat, const ThresholdRule& rule,
                  std::optional<double> e_xi2 = std::nullopt);

/// As fit_poet, with a caller-supplied residual in place of residual_matrix(pilot).
PoetPair fit_poet_with_residual(const PilotSet& pilot, const Eigen::MatrixXd& residual,
                                const Eigen::MatrixXd& x_hat, const ThresholdRule& rule,
                                std::optional<double> e_xi2 = std::nullopt);

}  // namespace robcov
