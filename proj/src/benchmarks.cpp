#include "robcov/benchmarks.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>
#include <utility>

#include "robcov/error.hpp"
#include "robcov/linalg.hpp"

namespace robcov {

PilotSet flw_pilots(const ReturnsPanel& panel, Eigen::Index k, const HuberConfig& cfg,
                    const KendallTau* tau) {
  PilotSet pilot;
  pilot.location = huber_mean_vector(panel, cfg);
  pilot.scatter = huber_pairwise_moment(panel, pilot.location, cfg);
  pilot.eigvals = leading_eigvecs(pilot.scatter, k).values;
  const KendallTau local = tau ? KendallTau{} : spatial_kendall_tau(panel);
  pilot.eigvecs = leading_eigvecs((tau ? *tau : local).matrix, k).vectors;
  pilot.eta_hat = 1.0;
  pilot.scale = PilotScale::covariance;
  return pilot;
}

PilotSet sample_pilots(const ReturnsPanel& panel, Eigen::Index k) {
  if (panel.n() < 2) throw std::invalid_argument("sample_pilots: need n >= 2");
  PilotSet pilot;
  pilot.location = panel.data().colwise().mean().transpose();
  const Eigen::MatrixXd centered = panel.data().rowwise() - pilot.location.transpose();
  pilot.scatter = symmetrized(centered.transpose() * centered / static_cast<double>(panel.n()));
  auto lead = leading_eigvecs(pilot.scatter, k);
  pilot.eigvals = std::move(lead.values);
  pilot.eigvecs = std::move(lead.vectors);
  pilot.eta_hat = 1.0;
  pilot.scale = PilotScale::covariance;
  return pilot;
}

PilotSet normalize_to_scatter(PilotSet pilot) {
  const double tr = pilot.scatter.trace();
  if (!(tr > 0.0)) throw DegenerateDataError("normalize_to_scatter: non-positive trace");
  const double p = static_cast<double>(pilot.p());
  const double factor = p / tr;
  pilot.scatter *= factor;
  pilot.eigvals *= factor;
  pilot.eta_hat *= factor;
  pilot.implied_xi2 = tr / p;
  pilot.scale = PilotScale::scatter;
  return pilot;
}

Eigen::MatrixXd repair_residual_diagonal(Eigen::MatrixXd residual) {
  const Eigen::Index p = residual.rows();
  if (p == 0 || residual.cols() != p)
    throw std::invalid_argument("repair_residual_diagonal: residual must be square and non-empty");
  const Eigen::VectorXd d = residual.diagonal();
  std::vector<double> diag(d.data(), d.data() + p);
  const auto mid = diag.begin() + p / 2;
  std::nth_element(diag.begin(), mid, diag.end());
  double median = *mid;
  if (p % 2 == 0) median = 0.5 * (median + *std::max_element(diag.begin(), mid));
  if (!(median > 0.0))
    throw DegenerateDataError("repair_residual_diagonal: median residual variance is not positive");
  for (Eigen::Index i = 0; i < p; ++i)
    if (!(residual(i, i) > 0.0)) residual(i, i) = median;
  return residual;
}

}  // namespace robcov
