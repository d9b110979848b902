#include "robcov/pilot_ipsn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "robcov/error.hpp"
#include "robcov/linalg.hpp"

namespace robcov {

KendallTau spatial_kendall_tau(const ReturnsPanel& panel) {
  const Eigen::Index n = panel.n();
  if (n < 2) throw std::invalid_argument("spatial_kendall_tau: need n >= 2 observations");

  // sum_{i<j} w_ij (y_i - y_j)(y_i - y_j)' = Y' L Y for the weighted graph
  // Laplacian L with w_ij = 1 / ||y_i - y_j||^2. Centering first leaves the
  // sum unchanged and keeps the cancellation in Y' L Y small.
  const Eigen::MatrixXd yt = (panel.data().rowwise() - panel.data().colwise().mean()).transpose();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index used = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d2 = (yt.col(i) - yt.col(j)).squaredNorm();
      if (d2 == 0.0) continue;
      const double w = 1.0 / d2;
      lap(i, j) = lap(j, i) = -w;
      lap(i, i) += w;
      lap(j, j) += w;
      ++used;
    }
  }
  if (used == 0) {
    throw DegenerateDataError("spatial_kendall_tau: all observation pairs are identical");
  }
  KendallTau tau;
  tau.matrix = symmetrized((yt * lap * yt.transpose()) / static_cast<double>(used));
  tau.pairs_used = used;
  return tau;
}

Eigen::Index default_k_max(Eigen::Index p, Eigen::Index n) {
  Eigen::Index k = std::min<Eigen::Index>(std::min(p, n) / 2, 15);
  k = std::min(k, p - 2);
  return std::max<Eigen::Index>(k, 1);
}

Eigen::Index estimate_num_factors(const KendallTau& tau, Eigen::Index k_max) {
  const Eigen::Index p = tau.matrix.rows();
  if (k_max < 1 || k_max > p - 2) {
    throw std::invalid_argument("estimate_num_factors: k_max=" + std::to_string(k_max) +
                                " outside [1, p-2] for p=" + std::to_string(p));
  }
  const Eigen::VectorXd ev = symmetric_eigenvalues(tau.matrix);
  if (!ev.allFinite()) throw NumericError("estimate_num_factors: non-finite eigenvalues");
  Eigen::Index best = 1;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    const double denom = ev(k);
    const double ratio =
        denom > 0.0 ? ev(k - 1) / denom : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  return best;
}

Projection idiosyncratic_projection(const Eigen::MatrixXd& gamma_ed) {
  const Eigen::Index p = gamma_ed.rows();
  const Eigen::Index k = gamma_ed.cols();
  if (k < 1 || k >= p) {
    throw std::invalid_argument("idiosyncratic_projection: need 1 <= K < p, got K=" +
                                std::to_string(k) + ", p=" + std::to_string(p));
  }
  const Eigen::MatrixXd gram = gamma_ed.transpose() * gamma_ed;
  if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument(
        "idiosyncratic_projection: columns are not orthonormal (rank-deficient input?)");
  }
  // The trailing p - K columns of the full Householder Q are an orthonormal
  // basis of the complement of span(gamma_ed).
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gamma_ed);
  const Eigen::MatrixXd q = qr.householderQ();
  return Projection{q.rightCols(p - k).transpose()};
}

namespace {

Eigen::VectorXd projected_norms(const Eigen::MatrixXd& centered, const Projection& proj) {
  return (centered * proj.matrix.transpose()).rowwise().norm();
}

void check_projection(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                      const Projection& proj, const char* who) {
  if (mu_hat.size() != panel.p() || proj.matrix.cols() != panel.p()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

}  // namespace

Eigen::MatrixXd ipsn_normalize(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                               const Projection& proj) {
  check_projection(panel, mu_hat, proj, "ipsn_normalize");
  const Eigen::MatrixXd centered = panel.data().rowwise() - mu_hat.transpose();
  const Eigen::VectorXd norms = projected_norms(centered, proj);
  for (Eigen::Index t = 0; t < norms.size(); ++t) {
    if (!(norms(t) > 0.0)) {
      throw DegenerateDataError("ipsn_normalize: observation t=" + std::to_string(t) +
                                " has zero idiosyncratic projection");
    }
  }
  const double sqrt_p = std::sqrt(static_cast<double>(panel.p()));
  return (sqrt_p * norms.cwiseInverse()).asDiagonal() * centered;
}

PilotSet pilot_scatter(const Eigen::MatrixXd& x_hat, Eigen::Index k, const Projection& proj,
                       const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat) {
  check_projection(panel, mu_hat, proj, "pilot_scatter");
  const Eigen::Index n = x_hat.rows();
  const Eigen::Index p = x_hat.cols();
  if (n != panel.n() || p != panel.p()) {
    throw std::invalid_argument("pilot_scatter: x_hat does not match the panel");
  }
  const Eigen::MatrixXd second = (x_hat.transpose() * x_hat) / static_cast<double>(n);
  const double tr = second.trace();
  if (!(tr > 0.0)) throw DegenerateDataError("pilot_scatter: zero trace of the second moment");

  PilotSet pilot;
  pilot.eta_hat = static_cast<double>(p) / tr;
  pilot.scatter = symmetrized(pilot.eta_hat * second);
  auto lead = leading_eigvecs(pilot.scatter, k);
  pilot.eigvals = std::move(lead.values);
  pilot.eigvecs = std::move(lead.vectors);
  pilot.location = mu_hat;
  const Eigen::MatrixXd centered = panel.data().rowwise() - mu_hat.transpose();
  // (y_t - mu) / xi_hat_t must equal sqrt(eta) x_t, which fixes the sqrt(p).
  pilot.xi_hat =
      projected_norms(centered, proj) / std::sqrt(static_cast<double>(p) * pilot.eta_hat);
  pilot.scale = PilotScale::scatter;
  return pilot;
}

IpsnPilots fit_ipsn_pilots(const ReturnsPanel& panel, Eigen::Index k, const IpsnOptions& options,
                           const KendallTau* tau) {
  IpsnPilots out;
  out.mu_hat = huber_mean_vector(panel, options.location);
  out.tau = tau ? *tau : spatial_kendall_tau(panel);
  out.gamma_ed = leading_eigvecs(out.tau.matrix, k).vectors;
  out.projection = idiosyncratic_projection(out.gamma_ed);
  out.x_hat = ipsn_normalize(panel, out.mu_hat, out.projection);
  out.pilot = pilot_scatter(out.x_hat, k, out.projection, panel, out.mu_hat);
  return out;
}

}  // namespace robcov
