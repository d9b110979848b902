#pragma once

// Experiment drivers behind the command-line tool: seeded Monte-Carlo
// comparisons, the xi-recovery diagnostic, and the portfolio backtest.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "robcov/metrics.hpp"
#include "robcov/pipeline.hpp"
#include "robcov/portfolio.hpp"

namespace robcov {

enum class Mode { simulate, backtest, xi_diagnostic };

struct ExperimentConfig {
  Mode mode = Mode::simulate;
  Eigen::Index p = 100;
  Eigen::Index n = 100;
  double epsilon = 2.0;
  Eigen::Index k_factors = 3;  // backtest: 0 = estimate per window
  int replications = 20;
  std::uint64_t seed = 20240601;
  std::vector<Estimator> estimators{Estimator::gpoet_ipsn, Estimator::gpoet_flw,
                                    Estimator::poet_s};
  ThresholdRule threshold;           // min_pd or fixed
  bool cross_validate_threshold = false;  // backtest only
  std::vector<double> cv_grid = default_threshold_grid();
  std::string out_dir = "robcov_out";
  unsigned threads = 0;  // 0 = ROBCOV_THREADS or hardware count
  std::string input;
  Eigen::Index window_days = 1260;
  Eigen::Index cv_holdout_days = 252;
  double annualization = 252.0;
  double huber_location_c = 1.0;
  double huber_xi2_c = 1.0;
  double xi2_epsilon = 1.0;
};

/// Applies one key=value setting; throws ConfigError on unknown keys or
/// unparsable values. Keys: mode, p, n, epsilon, k_factors, reps, seed,
/// estimators, threshold (min_pd | cv | <constant>), threshold_floor, cv_grid, out, threads,
/// input, window_days, cv_holdout_days, annualization, huber_c, xi2_c,
/// xi2_epsilon, full_size.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file ('#' starts a comment) on top of `base`.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// p = 500, n = 250, 100 replications.
void apply_full_size(ExperimentConfig& cfg);

/// Checks cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& cfg);

PipelineOptions pipeline_options(const ExperimentConfig& cfg);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct SimulationOutcome {
  std::vector<MetricsReport> reports;  // replication-major, estimator order as configured
  std::size_t failures = 0;

  bool excessive_failures() const { return failures * 10 > reports.size(); }
  /// Mean and sample sd over successful rows (sd = 0 for a single row).
  SummaryStat summary(Estimator e, const std::string& metric) const;
};

/// Runs the replications and writes replications.csv, pilot_summary.csv and
/// poet_summary.csv under cfg.out_dir. `console` may be null.
SimulationOutcome run_simulation(const ExperimentConfig& cfg, std::ostream* console = nullptr);

struct XiDiagnostic {
  Eigen::VectorXd xi;
  Eigen::VectorXd xi_hat_ipsn;
  Eigen::VectorXd xi_hat_selfnorm;  // ||y_t - mu_hat|| / sqrt(p)
  double max_dev_ipsn = 0.0;        // max_t |xi_hat / xi - 1|
  double max_dev_selfnorm = 0.0;
};

/// One replication; writes xi_diagnostic.csv under cfg.out_dir.
XiDiagnostic run_xi_diagnostic(const ExperimentConfig& cfg, std::ostream* console = nullptr);

/// Backtests every configured estimator on cfg.input and writes
/// <estimator>_weights.csv, <estimator>_returns.csv and backtest_summary.csv.
std::vector<BacktestResult> run_backtest(const ExperimentConfig& cfg,
                                         std::ostream* console = nullptr);

}  // namespace robcov
