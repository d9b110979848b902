#pragma once

// One entry point per estimator: pilots -> scatter-scale pilots -> POET.
// All three covariance estimators share the same POET step, so differences
// in their errors come from the pilots alone.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

#include "robcov/pilot_ipsn.hpp"
#include "robcov/poet.hpp"
#include "robcov/robust_scalar.hpp"

namespace robcov {

enum class Estimator { gpoet_ipsn, gpoet_flw, poet_s, equal_weight };

std::string_view to_string(Estimator e);
/// Accepts the identifiers printed by to_string; throws std::invalid_argument.
Estimator parse_estimator(std::string_view name);

struct PipelineOptions {
  HuberConfig location = HuberConfig::location_rule();
  HuberConfig xi2 = HuberConfig::moment_rule();
  HuberConfig flw = HuberConfig::location_rule();
  ThresholdRule threshold;
};

struct Fit {
  Estimator estimator = Estimator::gpoet_ipsn;
  PilotSet pilot;          // scatter scale, trace p
  Eigen::MatrixXd x_hat;   // rows whose sqrt(eta)-multiples feed theta
  double e_xi2 = 1.0;      // Huber estimate (IPSN) or trace / p (benchmarks)
  PoetPair poet;           // covariance member always set
};

/// Fits a covariance estimator (not equal_weight). `tau` may carry a
/// precomputed Kendall's tau for the same panel.
Fit fit_estimator(const ReturnsPanel& panel, Estimator estimator, Eigen::Index k,
                  const PipelineOptions& options = {}, const KendallTau* tau = nullptr);

}  // namespace robcov
