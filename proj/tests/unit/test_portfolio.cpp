#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "robcov/datagen.hpp"
#include "robcov/error.hpp"
#include "robcov/metrics.hpp"
#include "robcov/portfolio.hpp"

using namespace robcov;

namespace {

Eigen::MatrixXd random_pd(Eigen::Index p, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
}

// Business-day-like ISO dates: 21 rows per month starting 2001-01.
std::vector<std::string> monthly_dates(Eigen::Index n) {
  std::vector<std::string> dates;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index month = t / 21;
    const int year = 2001 + static_cast<int>(month / 12);
    const int mon = 1 + static_cast<int>(month % 12);
    const int day = 1 + static_cast<int>(t % 21);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, mon, day);
    dates.emplace_back(buf);
  }
  return dates;
}

DatedPanel dated(const Eigen::MatrixXd& returns) {
  DatedPanel panel;
  panel.returns = returns;
  panel.dates = monthly_dates(returns.rows());
  for (Eigen::Index j = 0; j < returns.cols(); ++j) panel.assets.push_back("A" + std::to_string(j));
  return panel;
}

DatedPanel model_dated(Eigen::Index p, Eigen::Index n, std::uint64_t seed) {
  SimulationSpec design;
  design.p = p;
  design.n = n;
  Rng rng = make_stream(seed, 0);
  const ModelTruth truth = draw_truth(design, rng);
  return dated(0.01 * simulate_panel(truth, rng).data());
}

}  // namespace

TEST(MvpWeights, ClosedFormExamples) {
  const Eigen::VectorXd eq = mvp_weights(Eigen::MatrixXd::Identity(4, 4), false);
  EXPECT_LT((eq.array() - 0.25).abs().maxCoeff(), 1e-15);
  const Eigen::VectorXd w = mvp_weights(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix(), false);
  EXPECT_NEAR(w(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w(1), 1.0 / 3.0, 1e-15);
  const Eigen::VectorXd wi = mvp_weights(Eigen::Vector2d(1, 0.5).asDiagonal().toDenseMatrix(), true);
  EXPECT_NEAR(wi(0), 2.0 / 3.0, 1e-15);
}

TEST(MvpWeights, Errors) {
  EXPECT_THROW(mvp_weights(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix(), false), NumericError);
  EXPECT_THROW(mvp_weights(-Eigen::MatrixXd::Identity(2, 2), true), NumericError);
  EXPECT_THROW(mvp_weights(Eigen::MatrixXd(2, 3), true), std::invalid_argument);
}

TEST(MvpWeights, BeatsRandomFeasiblePortfolios) {
  Rng rng(1);
  const Eigen::MatrixXd s = random_pd(3, rng);
  const Eigen::VectorXd w = mvp_weights(s, false);
  EXPECT_NEAR(w.sum(), 1.0, 1e-8);
  const double best = w.dot(s * w);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10'000; ++trial) {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    v /= v.sum();
    EXPECT_LE(best, v.dot(s * v) + 1e-8);
  }
}

TEST(MvpWeights, MatchesLagrangianClosedForm) {
  Rng rng(2);
  for (Eigen::Index p = 1; p <= 6; ++p) {
    const Eigen::MatrixXd s = random_pd(p, rng);
    // Solve [2S 1; 1' 0] [w; l] = [0; 1].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(p + 1, p + 1);
    kkt.topLeftCorner(p, p) = 2.0 * s;
    kkt.topRightCorner(p, 1).setOnes();
    kkt.bottomLeftCorner(1, p).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
    rhs(p) = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd w = mvp_weights(s, false);
    EXPECT_LT((w - sol.head(p)).cwiseAbs().maxCoeff(), 1e-8) << "p=" << p;
    EXPECT_NEAR(w.dot(s * w), sol.head(p).dot(s * sol.head(p)), 1e-8);
  }
}

TEST(MvpWeights, ScatterAndCovarianceInversesAgree) {
  SimulationSpec design;
  design.p = 25;
  design.n = 60;
  Rng rng = make_stream(3, 0);
  const ModelTruth truth = draw_truth(design, rng);
  const ReturnsPanel panel = simulate_panel(truth, rng);
  const Fit fit = fit_estimator(panel, Estimator::gpoet_ipsn, 3);
  const Eigen::VectorXd a = mvp_weights(fit.poet.scatter.full_inverse, true);
  const Eigen::VectorXd b = mvp_weights(fit.poet.covariance->full_inverse, true);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AnnualizedStd, Examples) {
  EXPECT_NEAR(annualized_std(Eigen::VectorXd::Constant(5, 0.3), 252.0), 0.0, 1e-15);
  Eigen::VectorXd alt(6);
  alt << 0.02, -0.02, 0.02, -0.02, 0.02, -0.02;
  EXPECT_NEAR(annualized_std(alt, 252.0), 0.02 * std::sqrt(252.0), 1e-10);
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(7);
  spike(4) = 0.7;
  double mean = 0.0;
  for (Eigen::Index t = 0; t < 7; ++t) mean += spike(t);
  mean /= 7.0;
  double var = 0.0;
  for (Eigen::Index t = 0; t < 7; ++t) var += (spike(t) - mean) * (spike(t) - mean);
  var /= 7.0;
  EXPECT_NEAR(annualized_std(spike, 12.0), std::sqrt(var * 12.0), 1e-15);
  EXPECT_THROW(annualized_std(Eigen::VectorXd::Zero(1), 252.0), std::invalid_argument);
  EXPECT_THROW(annualized_std(alt, 0.0), std::invalid_argument);
}

TEST(Backtest, SingleAssetHoldsEverything) {
  Rng rng(4);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd r(21 * 6, 1);
  for (Eigen::Index t = 0; t < r.rows(); ++t) r(t, 0) = 0.01 * normal(rng);
  BacktestConfig cfg;
  cfg.window_days = 42;
  const BacktestResult res = rolling_backtest(dated(r), cfg);
  ASSERT_EQ(res.weights.size(), 4u);
  for (const auto& w : res.weights) EXPECT_EQ(w.weights(0), 1.0);
  EXPECT_TRUE(res.returns == r.col(0).tail(21 * 4));
  EXPECT_EQ(res.dates.front(), "2001-03-01");
}

TEST(Backtest, EqualWeightReturnsRowMeans) {
  Rng rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd r(21 * 5, 4);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = normal(rng);
  BacktestConfig cfg;
  cfg.window_days = 21;
  cfg.estimator = Estimator::equal_weight;
  const BacktestResult res = rolling_backtest(dated(r), cfg);
  const Eigen::VectorXd means = r.rowwise().mean();
  EXPECT_LT((res.returns - means.tail(21 * 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(res.estimator, "equal_weight");
}

TEST(Backtest, ConstantReturnsHaveZeroRisk) {
  BacktestConfig cfg;
  cfg.window_days = 21;
  cfg.estimator = Estimator::equal_weight;
  const BacktestResult res = rolling_backtest(dated(Eigen::MatrixXd::Constant(21 * 14, 2, 0.001)), cfg);
  EXPECT_NEAR(res.full_period_std, 0.0, 1e-15);
  ASSERT_EQ(res.yearly_std.size(), 2u);
  EXPECT_EQ(res.yearly_std[0].first, 2001);
  EXPECT_EQ(res.yearly_std[1].first, 2002);
  EXPECT_NEAR(res.yearly_std[1].second, 0.0, 1e-15);
}

TEST(Backtest, InsufficientHistoryNamesTheFirstFeasibleDate) {
  BacktestConfig cfg;
  cfg.window_days = 30;
  cfg.estimator = Estimator::equal_weight;
  try {
    rolling_backtest(dated(Eigen::MatrixXd::Zero(40, 2)), cfg);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("2001-02-10"), std::string::npos) << e.what();
  }
}

TEST(Backtest, GpoetWeightsSumToOneAndStayDeterministic) {
  const DatedPanel panel = model_dated(20, 21 * 6, 6);
  BacktestConfig cfg;
  cfg.window_days = 63;
  cfg.estimator = Estimator::gpoet_ipsn;
  const BacktestResult a = rolling_backtest(panel, cfg);
  ASSERT_EQ(a.weights.size(), 3u);
  for (const auto& w : a.weights) {
    EXPECT_NEAR(w.weights.sum(), 1.0, 1e-8);
    EXPECT_GE(w.k_factors, 1);
    EXPECT_GT(w.threshold_constant, 0.0);
  }
  cfg.threads = 3;
  const BacktestResult b = rolling_backtest(panel, cfg);
  EXPECT_TRUE(a.returns == b.returns);
  EXPECT_EQ(a.full_period_std, b.full_period_std);
}

TEST(Backtest, FixedFactorCountIsRespected) {
  const DatedPanel panel = model_dated(15, 21 * 4, 7);
  BacktestConfig cfg;
  cfg.window_days = 42;
  cfg.estimator = Estimator::poet_s;
  cfg.k_factors = 2;
  const BacktestResult res = rolling_backtest(panel, cfg);
  for (const auto& w : res.weights) EXPECT_EQ(w.k_factors, 2);
}

TEST(CvThreshold, Examples) {
  const DatedPanel panel = model_dated(12, 21 * 4, 8);
  BacktestConfig cfg;
  cfg.window_days = 42;
  cfg.k_factors = 3;
  EXPECT_EQ(cv_threshold(panel, cfg, {1.25}), 1.25);
  // Constants this large all zero the off-diagonals: identical weights.
  EXPECT_EQ(cv_threshold(panel, cfg, {1e9, 1e8}), 1e8);
  EXPECT_THROW(cv_threshold(panel, cfg, {}), std::invalid_argument);
}

TEST(CvThreshold, SabotagedConstantIsNotSelected) {
  // Window shorter than p: without thresholding the residual has rank at
  // most n - 1 < p - K, so c = 0 leaves a (numerically) singular
  // idiosyncratic matrix.
  const DatedPanel panel = model_dated(40, 21 * 3, 9);
  BacktestConfig cfg;
  cfg.window_days = 21;
  cfg.k_factors = 3;
  cfg.estimator = Estimator::poet_s;
  EXPECT_EQ(cv_threshold(panel, cfg, {0.0, 50.0}), 50.0);
}

TEST(DatedCsv, RoundTrip) {
  DatedPanel panel = dated((Eigen::MatrixXd(3, 2) << 0.1, -0.2, 1e-17, 3.5, -0.25, 0.0).finished());
  std::stringstream ss;
  write_dated_csv(ss, panel);
  const DatedPanel back = parse_dated_csv(ss);
  EXPECT_EQ(back.dates, panel.dates);
  EXPECT_EQ(back.assets, panel.assets);
  EXPECT_TRUE(back.returns == panel.returns);
  const DatedPanel mid = back.slice(1, 3);
  EXPECT_EQ(mid.n(), 2);
  EXPECT_EQ(mid.dates.front(), panel.dates[1]);
}

namespace {

int parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_dated_csv(in);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

}  // namespace

TEST(DatedCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("day,A\n2001-01-01,0.1\n"), 1);
  EXPECT_EQ(parse_error_line("date,A,B\n2001-01-01,0.1,0.2\n2001-01-02,0.1\n"), 3);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-01,0.1\n2001-13-02,0.1\n"), 3);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-02,0.1\n2001-01-02,0.1\n"), 3);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-02,0.1\n2001-01-01,0.1\n"), 3);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-01,abc\n"), 2);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-01,nan\n"), 2);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-01,inf\n"), 2);
  EXPECT_EQ(parse_error_line("date,A\n2001-01-01,0.1\n"), -1);
}

TEST(DatedCsv, IsoDates) {
  EXPECT_TRUE(is_iso_date("2024-02-29"));
  EXPECT_FALSE(is_iso_date("2023-02-29"));
  EXPECT_FALSE(is_iso_date("2023-04-31"));
  EXPECT_FALSE(is_iso_date("2023-4-01"));
  EXPECT_FALSE(is_iso_date("2023/04/01"));
}
