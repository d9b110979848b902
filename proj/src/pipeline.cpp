#include "robcov/pipeline.hpp"

#include <stdexcept>
#include <string>

#include "robcov/benchmarks.hpp"

namespace robcov {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::gpoet_ipsn: return "gpoet_ipsn";
    case Estimator::gpoet_flw: return "gpoet_flw";
    case Estimator::poet_s: return "poet_s";
    case Estimator::equal_weight: return "equal_weight";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::gpoet_ipsn, Estimator::gpoet_flw, Estimator::poet_s,
                      Estimator::equal_weight}) {
    if (name == to_string(e)) return e;
  }
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

Fit fit_estimator(const ReturnsPanel& panel, Estimator estimator, Eigen::Index k,
                  const PipelineOptions& options, const KendallTau* tau) {
  Fit fit;
  fit.estimator = estimator;
  switch (estimator) {
    case Estimator::gpoet_ipsn: {
      IpsnPilots ipsn = fit_ipsn_pilots(panel, k, IpsnOptions{options.location}, tau);
      fit.e_xi2 = estimate_xi2(panel, ipsn.mu_hat, options.xi2);
      fit.pilot = std::move(ipsn.pilot);
      fit.x_hat = std::move(ipsn.x_hat);
      break;
    }
    case Estimator::gpoet_flw:
    case Estimator::poet_s: {
      PilotSet raw = estimator == Estimator::gpoet_flw ? flw_pilots(panel, k, options.flw, tau)
                                                       : sample_pilots(panel, k);
      fit.x_hat = panel.data().rowwise() - raw.location.transpose();
      fit.pilot = normalize_to_scatter(std::move(raw));
      fit.e_xi2 = *fit.pilot.implied_xi2;
      break;
    }
    case Estimator::equal_weight:
      throw std::invalid_argument("fit_estimator: equal_weight has no covariance estimate");
  }
  if (estimator == Estimator::gpoet_flw) {
    fit.poet = fit_poet_with_residual(fit.pilot, repair_residual_diagonal(residual_matrix(fit.pilot)),
                                      fit.x_hat, options.threshold, fit.e_xi2);
  } else {
    fit.poet = fit_poet(fit.pilot, fit.x_hat, options.threshold, fit.e_xi2);
  }
  return fit;
}

}  // namespace robcov
