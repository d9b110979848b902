#pragma once

// Minimum-variance portfolios and the monthly-rebalanced rolling backtest.

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "robcov/dated_panel.hpp"
#include "robcov/pipeline.hpp"

namespace robcov {

/// w = S^{-1} 1 / (1' S^{-1} 1). With is_inverse the argument already is
/// S^{-1}. The result is renormalized so that its entries sum to one.
Eigen::VectorXd mvp_weights(const Eigen::MatrixXd& precision_or_cov, bool is_inverse);

struct BacktestConfig {
  Eigen::Index window_days = 1260;
  Estimator estimator = Estimator::gpoet_ipsn;
  Eigen::Index k_factors = 0;  // 0: eigenvalue-ratio estimate on each window
  PipelineOptions pipeline;
  double annualization = 252.0;
  unsigned threads = 1;
};

struct WeightRecord {
  std::string date;  // first out-of-sample day the weights are held
  Eigen::VectorXd weights;
  Eigen::Index k_factors = 0;
  double threshold_constant = 0.0;
};

struct BacktestResult {
  std::string estimator;
  std::vector<std::string> dates;
  Eigen::VectorXd returns;  // out-of-sample daily portfolio returns
  std::vector<WeightRecord> weights;
  double full_period_std = 0.0;
  std::vector<std::pair<int, double>> yearly_std;  // calendar years with >= 2 days
};

/// Population standard deviation times sqrt(factor).
double annualized_std(const Eigen::VectorXd& daily, double factor);

/// Weights fitted on one estimation window.
WeightRecord fit_weights(const DatedPanel& window, const BacktestConfig& cfg);

/// At each month's first trading day with at least window_days prior rows,
/// fits on the trailing window and holds the weights until the next month.
BacktestResult rolling_backtest(const DatedPanel& panel, const BacktestConfig& cfg);

/// Backtests `panel` once per grid constant (fixed thresholding) and returns
/// the constant with the lowest annualized risk; ties go to the smaller one.
/// Constants whose backtest fails count as infinite risk.
double cv_threshold(const DatedPanel& panel, const BacktestConfig& cfg,
                    const std::vector<double>& grid);

}  // namespace robcov
