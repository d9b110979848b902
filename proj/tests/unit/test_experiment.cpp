#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "robcov/datagen.hpp"
#include "robcov/error.hpp"
#include "robcov/experiment.hpp"

using namespace robcov;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("robcov_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.p = 30;
  cfg.n = 40;
  cfg.replications = 3;
  cfg.seed = 123;
  cfg.out_dir = out.string();
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST(Config, SettingsAndOverrides) {
  ExperimentConfig cfg;
  apply_setting(cfg, "p", "250");
  apply_setting(cfg, " n ", " 120 ");
  apply_setting(cfg, "epsilon", "0.2");
  apply_setting(cfg, "estimators", "gpoet_ipsn, poet_s");
  apply_setting(cfg, "threshold", "1.5");
  apply_setting(cfg, "mode", "xi_diagnostic");
  apply_setting(cfg, "reps", "7");
  EXPECT_EQ(cfg.p, 250);
  EXPECT_EQ(cfg.n, 120);
  EXPECT_EQ(cfg.epsilon, 0.2);
  ASSERT_EQ(cfg.estimators.size(), 2u);
  EXPECT_EQ(cfg.estimators[1], Estimator::poet_s);
  EXPECT_EQ(cfg.threshold.kind, ThresholdRule::Kind::fixed);
  EXPECT_EQ(cfg.threshold.constant, 1.5);
  EXPECT_EQ(cfg.mode, Mode::xi_diagnostic);
  EXPECT_EQ(cfg.replications, 7);
  apply_setting(cfg, "threshold", "cv");
  EXPECT_TRUE(cfg.cross_validate_threshold);
  apply_setting(cfg, "k_factors", "auto");
  EXPECT_EQ(cfg.k_factors, 0);
  apply_setting(cfg, "full_size", "true");
  EXPECT_EQ(cfg.p, 500);
  EXPECT_EQ(cfg.n, 250);
  EXPECT_EQ(cfg.replications, 100);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  ExperimentConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "dimension", "5"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "p", "five"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "p", "5x"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "mode", "train"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "estimators", "ledoit_wolf"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "full_size", "maybe"), ConfigError);
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.replications = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.k_factors = cfg.p;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.estimators = {Estimator::equal_weight};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.mode = Mode::backtest;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.input = "returns.csv";
  cfg.k_factors = 0;
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, FileWithCommentsAndLineNumbers) {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "good.cfg");
    out << "# desk config\n\np = 60   # dimension\nn=70\nseed=9\n";
  }
  const ExperimentConfig cfg = load_config((dir / "good.cfg").string());
  EXPECT_EQ(cfg.p, 60);
  EXPECT_EQ(cfg.n, 70);
  EXPECT_EQ(cfg.seed, 9u);
  {
    std::ofstream out(dir / "bad.cfg");
    out << "p=60\nbogus=1\n";
  }
  try {
    load_config((dir / "bad.cfg").string());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config((dir / "missing.cfg").string()), ConfigError);
}

TEST(Simulation, WritesTablesAndIsDeterministicAcrossThreadCounts) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  ExperimentConfig cfg = small_config(a);
  const SimulationOutcome outcome = run_simulation(cfg);
  EXPECT_EQ(outcome.reports.size(), 9u);
  EXPECT_EQ(outcome.failures, 0u);
  EXPECT_FALSE(outcome.excessive_failures());
  cfg.out_dir = b.string();
  cfg.threads = 4;
  run_simulation(cfg);
  for (const char* f : {"replications.csv", "pilot_summary.csv", "poet_summary.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
  const std::string pilot = slurp(a / "pilot_summary.csv");
  EXPECT_EQ(pilot.rfind("estimator,statistic,sigma0_max,", 0), 0u);
  EXPECT_NE(pilot.find("gpoet_ipsn,mean,"), std::string::npos);
  EXPECT_NE(slurp(a / "run_metadata.csv").find("FLW-as-described"), std::string::npos);
}

TEST(Simulation, SingleReplicationHasZeroSd) {
  const fs::path dir = scratch("sim_one");
  ExperimentConfig cfg = small_config(dir);
  cfg.p = 50;
  cfg.n = 60;
  cfg.replications = 1;
  const SimulationOutcome outcome = run_simulation(cfg);
  for (Estimator e : cfg.estimators) {
    for (const auto& m : all_metric_ids()) EXPECT_EQ(outcome.summary(e, m).sd, 0.0) << m;
  }
  std::istringstream summary(slurp(dir / "poet_summary.csv"));
  std::string line;
  while (std::getline(summary, line)) {
    if (line.find(",sd,") == std::string::npos) continue;
    std::stringstream cells(line.substr(line.find(",sd,") + 4));
    std::string cell;
    while (std::getline(cells, cell, ',')) EXPECT_EQ(cell, "0.000") << line;
  }
}

TEST(Simulation, ReplicationRowsMatchIndependentRerun) {
  const fs::path dir = scratch("sim_rerun");
  ExperimentConfig cfg = small_config(dir);
  cfg.replications = 2;
  cfg.estimators = {Estimator::poet_s};
  const SimulationOutcome outcome = run_simulation(cfg);
  // Replication 1 rebuilt by hand from its own stream.
  SimulationSpec design;
  design.p = cfg.p;
  design.n = cfg.n;
  design.epsilon = cfg.epsilon;
  Rng rng = make_stream(cfg.seed, 1);
  const ModelTruth truth = draw_truth(design, rng);
  const ReturnsPanel panel = simulate_panel(truth, rng);
  const Fit fit = fit_estimator(panel, Estimator::poet_s, 3, pipeline_options(cfg));
  const MetricsReport want = evaluate(fit, truth, TruthReference(truth), 1);
  EXPECT_EQ(outcome.reports[1].values, want.values);
}

TEST(XiDiagnostic, ProjectionBeatsPlainSelfNormalization) {
  const fs::path dir = scratch("xi");
  ExperimentConfig cfg = small_config(dir);
  cfg.mode = Mode::xi_diagnostic;
  cfg.p = 200;
  cfg.n = 100;
  cfg.epsilon = 0.2;
  const XiDiagnostic d = run_xi_diagnostic(cfg);
  EXPECT_LT(d.max_dev_ipsn, d.max_dev_selfnorm);
  const std::string csv = slurp(dir / "xi_diagnostic.csv");
  EXPECT_EQ(csv.rfind("t,xi,xi_hat_ipsn,ratio_ipsn,xi_hat_selfnorm,ratio_selfnorm\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
  const XiDiagnostic again = run_xi_diagnostic(cfg);
  EXPECT_TRUE(again.xi_hat_ipsn == d.xi_hat_ipsn);
}

TEST(Backtest, EqualWeightOnConstantPanelAndParseErrors) {
  const fs::path dir = scratch("bt");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "returns.csv");
    out << "date,A,B\n";
    for (int m = 1; m <= 3; ++m)
      for (int d = 1; d <= 5; ++d) out << "2020-0" << m << "-0" << d << ",0.01,0.01\n";
  }
  ExperimentConfig cfg;
  cfg.mode = Mode::backtest;
  cfg.input = (dir / "returns.csv").string();
  cfg.out_dir = (dir / "out").string();
  cfg.window_days = 5;
  cfg.estimators = {Estimator::equal_weight};
  const auto results = run_backtest(cfg);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_NEAR(results[0].full_period_std, 0.0, 1e-15);
  const std::string summary = slurp(dir / "out" / "backtest_summary.csv");
  EXPECT_EQ(summary, "estimator,full_period,2020\nequal_weight,0.000,0.000\n");
  EXPECT_FALSE(slurp(dir / "out" / "equal_weight_weights.csv").empty());

  {
    std::ofstream out(dir / "broken.csv");
    out << "date,A\n2020-01-01,0.1\n2020-01-02,oops\n";
  }
  cfg.input = (dir / "broken.csv").string();
  try {
    run_backtest(cfg);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}
