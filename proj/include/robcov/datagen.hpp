#pragma once

// Elliptical factor model simulator:
//   y_t = mu + xi_t * sqrt(p) * Sigma0^{1/2} z_t / ||z_t||,  z_t ~ N(0, I_p),
// with Sigma0 = p (B B' + I) / tr(B B' + I) and Pareto-distributed xi_t.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "robcov/panel.hpp"
#include "robcov/rng.hpp"

namespace robcov {

/// Ground truth retained for error measurement.
struct ModelTruth {
  Eigen::MatrixXd sigma0;    // scatter, trace p
  Eigen::MatrixXd gamma_k;   // p x K leading eigenvectors (sign-fixed)
  Eigen::VectorXd lambda0_k; // K leading eigenvalues, descending
  Eigen::MatrixXd sigma0_u;  // idiosyncratic scatter p I / tr(B B' + I)
  Eigen::VectorXd mu;
  Eigen::VectorXd xi;        // length n
  double e_xi2 = 1.0;

  Eigen::Index p() const noexcept { return sigma0.rows(); }
  Eigen::Index n() const noexcept { return xi.size(); }
  Eigen::MatrixXd sigma() const { return e_xi2 * sigma0; }
  Eigen::MatrixXd sigma_u() const { return e_xi2 * sigma0_u; }
};

struct SimulationSpec {
  Eigen::Index p = 100;
  Eigen::Index n = 100;
  double epsilon = 2.0;  // Pareto index alpha = 2 + epsilon
  Eigen::Index k_factors = 3;
  std::vector<double> loading_scales{1.0, 0.75 * 0.75, 0.5 * 0.5};
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> mu;  // zero when unset
};

/// p (B B' + I_p) / tr(B B' + I_p).
Eigen::MatrixXd build_scatter(const Eigen::MatrixXd& loadings, Eigen::Index p);

/// Pareto scale x_m such that E(xi^2) = 1 for index alpha = 2 + epsilon.
double pareto_scale(double epsilon);

/// n i.i.d. Pareto(alpha = 2 + epsilon, x_m = pareto_scale(epsilon)) draws.
Eigen::VectorXd sample_pareto_xi(double epsilon, Eigen::Index n, Rng& rng);

/// Loadings with column k drawn i.i.d. N(0, loading_scales[k]).
Eigen::MatrixXd sample_loadings(const SimulationSpec& design, Rng& rng);

/// Draws loadings and the xi series, and fills in the derived truth.
ModelTruth draw_truth(const SimulationSpec& design, Rng& rng);

/// Truth for given loadings and xi (used by draw_truth and by tests that need
/// a fixed scatter).
ModelTruth make_truth(const Eigen::MatrixXd& loadings, Eigen::VectorXd xi, Eigen::Index k,
                      std::optional<Eigen::VectorXd> mu = std::nullopt);

/// One panel from the truth; the number of rows is truth.xi.size().
ReturnsPanel simulate_panel(const ModelTruth& truth, Rng& rng);

}  // namespace robcov
