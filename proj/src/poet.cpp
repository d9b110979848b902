#include "robcov/poet.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>
#include <string>

#include "robcov/error.hpp"
#include "robcov/linalg.hpp"

namespace robcov {

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 12; ++i) grid.push_back(0.25 * i);
  return grid;
}

double omega_rate(Eigen::Index p, Eigen::Index n) {
  if (p < 1 || n < 1) throw std::invalid_argument("omega_rate: p and n must be positive");
  const double log_p = std::log(static_cast<double>(p));
  return std::sqrt(log_p / static_cast<double>(p)) + std::sqrt(log_p / static_cast<double>(n));
}

Eigen::MatrixXd residual_matrix(const PilotSet& pilot) {
  const Eigen::MatrixXd low = pilot.eigvecs * pilot.eigvals.asDiagonal() * pilot.eigvecs.transpose();
  return symmetrized(pilot.scatter - low);
}

Eigen::MatrixXd estimate_theta(const Eigen::MatrixXd& x_hat, const PilotSet& pilot) {
  const Eigen::Index n = x_hat.rows();
  if (n < 2) throw std::invalid_argument("estimate_theta: need n >= 2");
  if (x_hat.cols() != pilot.p()) throw std::invalid_argument("estimate_theta: dimension mismatch");

  const Eigen::MatrixXd scaled = std::sqrt(pilot.eta_hat) * x_hat;
  const Eigen::MatrixXd u = scaled - (scaled * pilot.eigvecs) * pilot.eigvecs.transpose();
  const Eigen::MatrixXd r = residual_matrix(pilot);
  const Eigen::MatrixXd u2 = u.array().square().matrix();
  const double inv_n = 1.0 / static_cast<double>(n);
  // (1/n) sum (u_i u_j - R_ij)^2 expanded into three matrix products.
  const Eigen::MatrixXd fourth = (u2.transpose() * u2) * inv_n;
  const Eigen::MatrixXd second = (u.transpose() * u) * inv_n;
  Eigen::MatrixXd theta =
      (fourth.array() - 2.0 * r.array() * second.array() + r.array().square()).matrix();
  theta = symmetrized(theta).cwiseMax(0.0);
  return theta;
}

Eigen::MatrixXd adaptive_threshold(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& theta,
                                   double c, double omega_n) {
  if (c < 0.0) throw std::invalid_argument("adaptive_threshold: negative threshold constant");
  if (residual.rows() != residual.cols() || theta.rows() != residual.rows() ||
      theta.cols() != residual.cols()) {
    throw std::invalid_argument("adaptive_threshold: shape mismatch");
  }
  const Eigen::Index p = residual.rows();
  Eigen::MatrixXd out = residual;
  if (c == 0.0) return out;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i == j) continue;
      const double level = c * omega_n * std::sqrt(theta(i, j));
      const double r = residual(i, j);
      const double shrunk = std::abs(r) - level;
      out(i, j) = shrunk > 0.0 ? std::copysign(shrunk, r) : 0.0;
    }
  }
  return out;
}

namespace {

bool is_positive_definite(const Eigen::MatrixXd& m) {
  const Eigen::Index p = m.rows();
  const double delta = 1e-8 * m.trace() / static_cast<double>(p);
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() -= std::max(delta, 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

}  // namespace

ThresholdChoice min_pd_constant(const Eigen::MatrixXd& residual, const Eigen::MatrixXd& theta,
                                double omega_n, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("min_pd_constant: empty grid");
  for (double c : grid) {
    if (is_positive_definite(adaptive_threshold(residual, theta, c, omega_n))) return {c, false};
  }
  return {grid.back(), true};
}

namespace {

PoetEstimate rescaled(const PoetEstimate& est, double factor) {
  PoetEstimate out = est;
  out.low_rank *= factor;
  out.idio *= factor;
  out.full *= factor;
  out.idio_inverse /= factor;
  out.full_inverse /= factor;
  out.scale = PilotScale::covariance;
  return out;
}

}  // namespace

PoetPair assemble_poet(const PilotSet& pilot, const Eigen::MatrixXd& idio,
                       std::optional<double> e_xi2) {
  const Eigen::Index p = pilot.p();
  const Eigen::Index k = pilot.k();
  if (idio.rows() != p || idio.cols() != p) {
    throw std::invalid_argument("assemble_poet: idiosyncratic matrix has the wrong shape");
  }
  PoetEstimate est;
  est.scale = pilot.scale;
  const Eigen::MatrixXd& gamma = pilot.eigvecs;
  const Eigen::VectorXd& lambda = pilot.eigvals;
  est.low_rank = gamma * lambda.asDiagonal() * gamma.transpose();
  est.idio = idio;
  est.full = est.low_rank + est.idio;

  Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(idio));
  if (llt.info() != Eigen::Success) {
    throw NumericError("assemble_poet: idiosyncratic component is singular or indefinite");
  }
  est.idio_inverse = llt.solve(Eigen::MatrixXd::Identity(p, p));
  if (!est.idio_inverse.allFinite()) {
    throw NumericError("assemble_poet: idiosyncratic inverse is not finite");
  }

  // (A + G L G')^{-1} = A^{-1} - W L (I + G' W L)^{-1} W',  W = A^{-1} G.
  // This form stays valid when some leading eigenvalues are zero.
  const Eigen::MatrixXd w = est.idio_inverse * gamma;
  const Eigen::MatrixXd core =
      Eigen::MatrixXd::Identity(k, k) + (gamma.transpose() * w) * lambda.asDiagonal();
  const Eigen::MatrixXd correction = lambda.asDiagonal() * core.partialPivLu().solve(w.transpose());
  est.full_inverse = symmetrized(est.idio_inverse - w * correction);
  if (!est.full_inverse.allFinite()) throw NumericError("assemble_poet: inverse is not finite");

  PoetPair out{std::move(est), std::nullopt};
  if (e_xi2) {
    if (!(*e_xi2 > 0.0)) throw std::invalid_argument("assemble_poet: E(xi^2) must be positive");
    out.covariance = rescaled(out.scatter, *e_xi2);
  }
  return out;
}

PoetPair fit_poet(const PilotSet& pilot, const Eigen::MatrixXd& x_hat, const ThresholdRule& rule,
                  std::optional<double> e_xi2) {
  return fit_poet_with_residual(pilot, residual_matrix(pilot), x_hat, rule, e_xi2);
}

PoetPair fit_poet_with_residual(const PilotSet& pilot, const Eigen::MatrixXd& residual,
                                const Eigen::MatrixXd& x_hat, const ThresholdRule& rule,
                                std::optional<double> e_xi2) {
  const Eigen::MatrixXd theta = estimate_theta(x_hat, pilot);
  const double omega = omega_rate(pilot.p(), x_hat.rows());
  ThresholdChoice choice;
  if (rule.kind == ThresholdRule::Kind::fixed) {
    choice.constant = rule.constant;
  } else {
    std::vector<double> grid;
    for (double c : rule.grid.empty() ? default_threshold_grid() : rule.grid)
      if (c >= rule.floor) grid.push_back(c);
    if (grid.empty()) grid.push_back(rule.floor);
    choice = min_pd_constant(residual, theta, omega, grid);
  }
  // No grid constant gave a PD matrix: fall back to the diagonal, which is
  // what a large enough constant would produce.
  const Eigen::MatrixXd idio =
      choice.fallback ? Eigen::MatrixXd(residual.diagonal().asDiagonal())
                      : adaptive_threshold(residual, theta, choice.constant, omega);
  PoetPair pair = assemble_poet(pilot, idio, e_xi2);
  for (PoetEstimate* est : {&pair.scatter, pair.covariance ? &*pair.covariance : nullptr}) {
    if (!est) continue;
    est->threshold_constant = choice.constant;
    est->omega_n = omega;
    est->threshold_fallback = choice.fallback;
  }
  return pair;
}

}  // namespace robcov
