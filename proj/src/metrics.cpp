#include "robcov/metrics.hpp"

#include <cstdio>

namespace robcov {

TruthReference::TruthReference(const ModelTruth& truth)
    : sigma0_inv_sqrt(sym_inv_sqrt(truth.sigma0)),
      sigma_inv_sqrt(sigma0_inv_sqrt / std::sqrt(truth.e_xi2)),
      sigma0_inv(sigma0_inv_sqrt * sigma0_inv_sqrt),
      sigma_inv(sigma0_inv / truth.e_xi2),
      sigma0_u_inv(truth.sigma0_u.ldlt().solve(
          Eigen::MatrixXd::Identity(truth.p(), truth.p()))),
      sigma_u_inv(sigma0_u_inv / truth.e_xi2) {}

const std::vector<std::string>& pilot_metric_ids() {
  static const std::vector<std::string> ids{"sigma0_max", "sigma_max", "lambda0_ratio",
                                            "lambda_ratio", "eigvec_max_sqrtp", "xi_mse"};
  return ids;
}

const std::vector<std::string>& poet_metric_ids() {
  static const std::vector<std::string> ids{
      "sigma0_relF", "sigma_relF",     "idio0_spec",    "idio_spec",  "inv0_spec",
      "inv_spec",    "idio0_inv_spec", "idio_inv_spec", "threshold_c"};
  return ids;
}

const std::vector<std::string>& all_metric_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> all = pilot_metric_ids();
    all.insert(all.end(), poet_metric_ids().begin(), poet_metric_ids().end());
    return all;
  }();
  return ids;
}

MetricsReport evaluate(const Fit& fit, const ModelTruth& truth, const TruthReference& ref,
                       int replication) {
  MetricsReport report;
  report.replication = replication;
  report.estimator = std::string(to_string(fit.estimator));
  auto& v = report.values;

  const PilotSet& pilot = fit.pilot;
  const Eigen::MatrixXd sigma = truth.sigma();
  v["sigma0_max"] = max_norm_error(pilot.scatter, truth.sigma0);
  v["sigma_max"] = max_norm_error(fit.e_xi2 * pilot.scatter, sigma);
  v["lambda0_ratio"] = eigval_ratio_error(pilot.eigvals, truth.lambda0_k);
  v["lambda_ratio"] = eigval_ratio_error(fit.e_xi2 * pilot.eigvals, truth.e_xi2 * truth.lambda0_k);
  v["eigvec_max_sqrtp"] = eigvec_error(pilot.eigvecs, truth.gamma_k);
  if (pilot.xi_hat.size() == truth.xi.size() && pilot.xi_hat.size() > 0) {
    v["xi_mse"] = xi_mse(pilot.xi_hat, truth.xi);
  }

  const PoetEstimate& s0 = fit.poet.scatter;
  const PoetEstimate& s = *fit.poet.covariance;
  v["sigma0_relF"] = relative_frobenius_whitened(s0.full, truth.sigma0, ref.sigma0_inv_sqrt);
  v["sigma_relF"] = relative_frobenius_whitened(s.full, sigma, ref.sigma_inv_sqrt);
  v["idio0_spec"] = spectral_norm_error(s0.idio, truth.sigma0_u);
  v["idio_spec"] = spectral_norm_error(s.idio, truth.sigma_u());
  v["inv0_spec"] = spectral_norm_error(s0.full_inverse, ref.sigma0_inv);
  v["inv_spec"] = spectral_norm_error(s.full_inverse, ref.sigma_inv);
  v["idio0_inv_spec"] = spectral_norm_error(s0.idio_inverse, ref.sigma0_u_inv);
  v["idio_inv_spec"] = spectral_norm_error(s.idio_inverse, ref.sigma_u_inv);
  v["threshold_c"] = s0.threshold_constant;
  return report;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_rounded(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string metrics_csv_header() {
  std::string h = "replication,estimator,status";
  for (const auto& id : all_metric_ids()) h += "," + id;
  return h;
}

std::string metrics_csv_row(const MetricsReport& report) {
  std::string row = std::to_string(report.replication) + "," + report.estimator + "," +
                    (report.failed ? "failed" : "ok");
  for (const auto& id : all_metric_ids()) {
    row += ",";
    if (auto it = report.values.find(id); it != report.values.end()) row += format_full(it->second);
  }
  return row;
}

}  // namespace robcov
