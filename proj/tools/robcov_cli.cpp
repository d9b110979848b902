// robcov: Monte-Carlo comparisons, xi diagnostic and MVP backtests.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 more than 10% of replication fits failed.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "robcov/error.hpp"
#include "robcov/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kExcessiveFailures = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust scatter/covariance estimation under heavy-tailed elliptical factor models"};

  std::string config_path, mode, p, n, epsilon, seed, reps, estimators, out, threads, input;
  std::string k_factors, threshold, window_days;
  std::vector<std::string> settings;
  bool full_size = false;

  app.add_option("-c,--config", config_path, "key=value configuration file");
  app.add_option("--mode", mode, "simulate | xi_diagnostic | backtest");
  app.add_option("--p", p, "dimension");
  app.add_option("--n", n, "sample size");
  app.add_option("--epsilon", epsilon, "tail parameter (Pareto index 2 + epsilon)");
  app.add_option("--k", k_factors, "number of factors (backtest: 'auto')");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--reps", reps, "replications");
  app.add_option("--estimators", estimators, "comma list: gpoet_ipsn,gpoet_flw,poet_s,equal_weight");
  app.add_option("--threshold", threshold, "min_pd | cv | <constant>");
  app.add_option("--window", window_days, "backtest estimation window in rows");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_option("--input", input, "dated returns CSV for backtest mode");
  app.add_option("--set", settings, "extra key=value override (repeatable)");
  app.add_flag("--full-size", full_size, "p=500, n=250, 100 replications");

  CLI11_PARSE(app, argc, argv);

  robcov::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = robcov::load_config(config_path, cfg);
    if (full_size) robcov::apply_full_size(cfg);
    const std::pair<const char*, const std::string*> overrides[] = {
        {"mode", &mode},       {"p", &p},           {"n", &n},
        {"epsilon", &epsilon}, {"k_factors", &k_factors}, {"seed", &seed},
        {"reps", &reps},       {"estimators", &estimators}, {"threshold", &threshold},
        {"window_days", &window_days}, {"out", &out}, {"threads", &threads},
        {"input", &input}};
    for (const auto& [key, value] : overrides) {
      if (!value->empty()) robcov::apply_setting(cfg, key, *value);
    }
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw robcov::ConfigError("--set expects key=value, got '" + kv + "'");
      robcov::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    robcov::validate(cfg);
  } catch (const robcov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    switch (cfg.mode) {
      case robcov::Mode::simulate: {
        const auto outcome = robcov::run_simulation(cfg, &std::cout);
        if (outcome.excessive_failures()) {
          std::cerr << outcome.failures << " of " << outcome.reports.size()
                    << " estimator fits failed\n";
          return kExcessiveFailures;
        }
        break;
      }
      case robcov::Mode::xi_diagnostic:
        robcov::run_xi_diagnostic(cfg, &std::cout);
        break;
      case robcov::Mode::backtest:
        robcov::run_backtest(cfg, &std::cout);
        break;
    }
  } catch (const robcov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
