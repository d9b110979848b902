#include "robcov/datagen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "robcov/linalg.hpp"

namespace robcov {

Eigen::MatrixXd build_scatter(const Eigen::MatrixXd& loadings, Eigen::Index p) {
  if (p < 1 || loadings.rows() != p) {
    throw std::invalid_argument("build_scatter: loadings have " + std::to_string(loadings.rows()) +
                                " rows, expected p=" + std::to_string(p));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
  if (loadings.cols() > 0) m.noalias() += loadings * loadings.transpose();
  return (static_cast<double>(p) / m.trace()) * m;
}

double pareto_scale(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("pareto_scale: epsilon must be > 0 for a finite second moment");
  }
  const double alpha = 2.0 + epsilon;
  return std::sqrt((alpha - 2.0) / alpha);
}

Eigen::VectorXd sample_pareto_xi(double epsilon, Eigen::Index n, Rng& rng) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("sample_pareto_xi: epsilon must be > 0, got " +
                                std::to_string(epsilon));
  }
  if (n < 1) throw std::invalid_argument("sample_pareto_xi: n must be >= 1");
  const double alpha = 2.0 + epsilon;
  const double xm = pareto_scale(epsilon);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd xi(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double u = 1.0 - unif(rng);  // (0, 1]
    xi(t) = xm * std::pow(u, -1.0 / alpha);
  }
  return xi;
}

Eigen::MatrixXd sample_loadings(const SimulationSpec& design, Rng& rng) {
  if (design.k_factors < 1 || static_cast<std::size_t>(design.k_factors) != design.loading_scales.size()) {
    throw std::invalid_argument("sample_loadings: need one loading variance per factor");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd b(design.p, design.k_factors);
  for (Eigen::Index k = 0; k < design.k_factors; ++k) {
    const double sd = std::sqrt(design.loading_scales[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < design.p; ++i) b(i, k) = sd * normal(rng);
  }
  return b;
}

ModelTruth make_truth(const Eigen::MatrixXd& loadings, Eigen::VectorXd xi, Eigen::Index k,
                      std::optional<Eigen::VectorXd> mu) {
  const Eigen::Index p = loadings.rows();
  ModelTruth truth;
  truth.sigma0 = build_scatter(loadings, p);
  const auto lead = leading_eigvecs(truth.sigma0, k);
  truth.gamma_k = lead.vectors;
  truth.lambda0_k = lead.values;
  double raw_trace = static_cast<double>(p);
  if (loadings.cols() > 0) raw_trace += loadings.squaredNorm();
  truth.sigma0_u = (static_cast<double>(p) / raw_trace) * Eigen::MatrixXd::Identity(p, p);
  truth.mu = mu ? *mu : Eigen::VectorXd::Zero(p);
  if (truth.mu.size() != p) throw std::invalid_argument("make_truth: mu has wrong length");
  truth.xi = std::move(xi);
  truth.e_xi2 = 1.0;
  return truth;
}

ModelTruth draw_truth(const SimulationSpec& design, Rng& rng) {
  if (design.p < 2 || design.n < 2) throw std::invalid_argument("draw_truth: need p >= 2 and n >= 2");
  if (design.k_factors > std::min(design.p, design.n)) {
    throw std::invalid_argument("draw_truth: k_factors exceeds min(p, n)");
  }
  const Eigen::MatrixXd b = sample_loadings(design, rng);
  Eigen::VectorXd xi = sample_pareto_xi(design.epsilon, design.n, rng);
  return make_truth(b, std::move(xi), design.k_factors, design.mu);
}

ReturnsPanel simulate_panel(const ModelTruth& truth, Rng& rng) {
  const Eigen::Index p = truth.p();
  const Eigen::Index n = truth.n();
  if (p < 1 || n < 1 || truth.mu.size() != p) {
    throw std::invalid_argument("simulate_panel: truth is not fully populated");
  }
  const Eigen::MatrixXd root = sym_sqrt(truth.sigma0);

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index i = 0; i < p; ++i) z(t, i) = normal(rng);
  }
  const double sqrt_p = std::sqrt(static_cast<double>(p));
  const Eigen::VectorXd row_scale =
      (sqrt_p * truth.xi.array() / z.rowwise().norm().array()).matrix();
  Eigen::MatrixXd y = row_scale.asDiagonal() * (z * root);
  y.rowwise() += truth.mu.transpose();
  return ReturnsPanel(std::move(y));
}

}  // namespace robcov
