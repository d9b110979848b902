#include "robcov/portfolio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "robcov/error.hpp"
#include "robcov/parallel.hpp"

namespace robcov {

Eigen::VectorXd mvp_weights(const Eigen::MatrixXd& m, bool is_inverse) {
  const Eigen::Index p = m.rows();
  if (p < 1 || m.cols() != p) throw std::invalid_argument("mvp_weights: need a square matrix");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p);
  Eigen::VectorXd x;
  if (is_inverse) {
    x = m * ones;
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericError("mvp_weights: matrix is not PD");
    x = llt.solve(ones);
  }
  const double denom = x.sum();
  if (!(denom > 0.0) || !std::isfinite(denom) || !x.allFinite()) {
    throw NumericError("mvp_weights: 1' S^{-1} 1 is not positive and finite");
  }
  Eigen::VectorXd w = x / denom;
  return w / w.sum();
}

double annualized_std(const Eigen::VectorXd& daily, double factor) {
  if (daily.size() < 2) throw std::invalid_argument("annualized_std: need >= 2 observations");
  if (!(factor > 0.0)) throw std::invalid_argument("annualized_std: factor must be positive");
  const double mean = daily.mean();
  const double var = (daily.array() - mean).square().mean();
  return std::sqrt(var * factor);
}

WeightRecord fit_weights(const DatedPanel& window, const BacktestConfig& cfg) {
  WeightRecord rec;
  const Eigen::Index p = window.p();
  if (cfg.estimator == Estimator::equal_weight || p == 1) {
    rec.weights = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
    return rec;
  }
  const ReturnsPanel panel(window.returns);
  const KendallTau tau = spatial_kendall_tau(panel);
  Eigen::Index k = cfg.k_factors;
  if (k <= 0) {
    k = p >= 3 ? estimate_num_factors(tau, default_k_max(p, panel.n())) : 1;
  }
  k = std::min(k, p - 1);
  const Fit fit = fit_estimator(panel, cfg.estimator, k, cfg.pipeline, &tau);
  rec.weights = mvp_weights(fit.poet.scatter.full_inverse, true);
  rec.k_factors = k;
  rec.threshold_constant = fit.poet.scatter.threshold_constant;
  return rec;
}

BacktestResult rolling_backtest(const DatedPanel& panel, const BacktestConfig& cfg) {
  const Eigen::Index n = panel.n();
  const Eigen::Index window = cfg.window_days;
  if (window < 2) throw std::invalid_argument("rolling_backtest: window_days must be >= 2");
  if (static_cast<std::size_t>(n) != panel.dates.size() || panel.p() < 1) {
    throw std::invalid_argument("rolling_backtest: malformed panel");
  }

  std::vector<Eigen::Index> starts;
  for (Eigen::Index t = std::max<Eigen::Index>(window, 1); t < n; ++t) {
    const auto& cur = panel.dates[static_cast<std::size_t>(t)];
    const auto& prev = panel.dates[static_cast<std::size_t>(t - 1)];
    if (cur.compare(0, 7, prev, 0, 7) != 0) starts.push_back(t);
  }
  if (starts.empty()) {
    const std::string first =
        n > window ? panel.dates[static_cast<std::size_t>(window)] : std::string("<beyond data>");
    throw std::invalid_argument(
        "rolling_backtest: insufficient history; need " + std::to_string(window) +
        " rows before a month start, first feasible date is the first month start on or after " +
        first + " (panel has " + std::to_string(n) + " rows)");
  }

  BacktestResult result;
  result.estimator = std::string(to_string(cfg.estimator));
  result.weights.resize(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t j) {
    const Eigen::Index s = starts[j];
    result.weights[j] = fit_weights(panel.slice(s - window, s), cfg);
    result.weights[j].date = panel.dates[static_cast<std::size_t>(s)];
  });

  const Eigen::Index first = starts.front();
  result.returns.resize(n - first);
  for (std::size_t j = 0; j < starts.size(); ++j) {
    const Eigen::Index end = j + 1 < starts.size() ? starts[j + 1] : n;
    for (Eigen::Index t = starts[j]; t < end; ++t) {
      result.returns(t - first) = panel.returns.row(t).dot(result.weights[j].weights);
      result.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
    }
  }

  result.full_period_std =
      result.returns.size() >= 2 ? annualized_std(result.returns, cfg.annualization) : 0.0;
  std::size_t begin = 0;
  while (begin < result.dates.size()) {
    std::size_t end = begin;
    while (end < result.dates.size() && result.dates[end].compare(0, 4, result.dates[begin], 0, 4) == 0) {
      ++end;
    }
    if (end - begin >= 2) {
      const Eigen::VectorXd year = result.returns.segment(static_cast<Eigen::Index>(begin),
                                                          static_cast<Eigen::Index>(end - begin));
      result.yearly_std.emplace_back(std::stoi(result.dates[begin].substr(0, 4)),
                                     annualized_std(year, cfg.annualization));
    }
    begin = end;
  }
  return result;
}

double cv_threshold(const DatedPanel& panel, const BacktestConfig& cfg,
                    const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("cv_threshold: empty grid");
  double best_c = std::numeric_limits<double>::quiet_NaN();
  double best_risk = std::numeric_limits<double>::infinity();
  for (double c : grid) {
    BacktestConfig trial = cfg;
    trial.pipeline.threshold = ThresholdRule::fixed_constant(c);
    double risk = std::numeric_limits<double>::infinity();
    try {
      risk = rolling_backtest(panel, trial).full_period_std;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      // Singular or indefinite fits disqualify this constant.
    }
    if (!std::isfinite(risk)) risk = std::numeric_limits<double>::infinity();
    if (std::isnan(best_c) || risk < best_risk || (risk == best_risk && c < best_c)) {
      best_risk = risk;
      best_c = c;
    }
  }
  if (!std::isfinite(best_risk)) {
    throw NumericError("cv_threshold: every grid constant failed");
  }
  return best_c;
}

}  // namespace robcov
