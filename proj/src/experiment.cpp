#include "robcov/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "robcov/datagen.hpp"
#include "robcov/error.hpp"
#include "robcov/parallel.hpp"
#include "robcov/rng.hpp"

namespace robcov {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

std::string threshold_label(const ExperimentConfig& cfg) {
  if (cfg.cross_validate_threshold) return "cv";
  if (cfg.threshold.kind == ThresholdRule::Kind::fixed) return format_full(cfg.threshold.constant);
  return "min_pd(floor=" + format_full(cfg.threshold.floor) + ")";
}

// Tuning choices that are not visible in the result tables.
void write_metadata(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  auto out = open_output(dir / "run_metadata.csv");
  out << "key,value\n";
  out << "seed," << cfg.seed << '\n';
  out << "threshold," << threshold_label(cfg) << '\n';
  out << "huber_location_c," << format_full(cfg.huber_location_c) << '\n';
  out << "xi2_rule,moment\n";
  out << "xi2_c," << format_full(cfg.huber_xi2_c) << '\n';
  out << "xi2_assumed_epsilon," << format_full(cfg.xi2_epsilon) << '\n';
  out << "gpoet_flw_variant,FLW-as-described (Huber pairwise covariance + Kendall eigenvectors)\n";
  out << "poet_s_divisor,n\n";
  out << "gpoet_flw_residual_diagonal,non-positive entries replaced by the median\n";
}

}  // namespace

void apply_full_size(ExperimentConfig& cfg) {
  cfg.p = 500;
  cfg.n = 250;
  cfg.replications = 100;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(value);
  if (key == "mode") {
    if (v == "simulate") cfg.mode = Mode::simulate;
    else if (v == "backtest") cfg.mode = Mode::backtest;
    else if (v == "xi_diagnostic") cfg.mode = Mode::xi_diagnostic;
    else throw ConfigError("unknown mode '" + v + "'");
  } else if (key == "p") {
    cfg.p = parse_number<Eigen::Index>(key, v);
  } else if (key == "n") {
    cfg.n = parse_number<Eigen::Index>(key, v);
  } else if (key == "epsilon") {
    cfg.epsilon = parse_number<double>(key, v);
  } else if (key == "k_factors") {
    cfg.k_factors = v == "auto" ? 0 : parse_number<Eigen::Index>(key, v);
  } else if (key == "reps" || key == "replications") {
    cfg.replications = parse_number<int>(key, v);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "estimators") {
    cfg.estimators.clear();
    for (const auto& name : split_list(v)) {
      try {
        cfg.estimators.push_back(parse_estimator(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  } else if (key == "threshold") {
    if (v == "min_pd") {
      const double floor = cfg.threshold.floor;
      cfg.threshold = ThresholdRule{};
      cfg.threshold.floor = floor;
      cfg.cross_validate_threshold = false;
    } else if (v == "cv") {
      cfg.cross_validate_threshold = true;
    } else {
      cfg.threshold = ThresholdRule::fixed_constant(parse_number<double>(key, v));
      cfg.cross_validate_threshold = false;
    }
  } else if (key == "threshold_floor") {
    cfg.threshold.floor = parse_number<double>(key, v);
  } else if (key == "cv_grid") {
    cfg.cv_grid.clear();
    for (const auto& item : split_list(v)) cfg.cv_grid.push_back(parse_number<double>(key, item));
  } else if (key == "out") {
    cfg.out_dir = v;
  } else if (key == "threads") {
    cfg.threads = parse_number<unsigned>(key, v);
  } else if (key == "input") {
    cfg.input = v;
  } else if (key == "window_days") {
    cfg.window_days = parse_number<Eigen::Index>(key, v);
  } else if (key == "cv_holdout_days") {
    cfg.cv_holdout_days = parse_number<Eigen::Index>(key, v);
  } else if (key == "annualization") {
    cfg.annualization = parse_number<double>(key, v);
  } else if (key == "huber_c") {
    cfg.huber_location_c = parse_number<double>(key, v);
  } else if (key == "xi2_c") {
    cfg.huber_xi2_c = parse_number<double>(key, v);
  } else if (key == "xi2_epsilon") {
    cfg.xi2_epsilon = parse_number<double>(key, v);
  } else if (key == "full_size") {
    if (parse_bool(key, v)) apply_full_size(cfg);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("reps must be >= 1");
  if (cfg.estimators.empty()) throw ConfigError("no estimators configured");
  if (cfg.threshold.kind == ThresholdRule::Kind::fixed && cfg.threshold.constant < 0.0) {
    throw ConfigError("threshold constant must be >= 0");
  }
  if (!(cfg.threshold.floor >= 0.0)) throw ConfigError("threshold_floor must be >= 0");
  if (cfg.mode == Mode::backtest) {
    if (cfg.input.empty()) throw ConfigError("backtest mode needs input=<csv>");
    if (cfg.window_days < 2) throw ConfigError("window_days must be >= 2");
    if (!(cfg.annualization > 0.0)) throw ConfigError("annualization must be positive");
    if (cfg.cross_validate_threshold && cfg.cv_grid.empty()) throw ConfigError("empty cv_grid");
    return;
  }
  if (cfg.p < 2 || cfg.n < 2) throw ConfigError("p and n must be >= 2");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (cfg.k_factors < 1 || cfg.k_factors > std::min(cfg.p - 1, cfg.n)) {
    throw ConfigError("k_factors must be in [1, min(p - 1, n)]");
  }
  for (Estimator e : cfg.estimators) {
    if (e == Estimator::equal_weight) throw ConfigError("equal_weight is a backtest-only estimator");
  }
}

PipelineOptions pipeline_options(const ExperimentConfig& cfg) {
  PipelineOptions opts;
  opts.location = HuberConfig::location_rule(cfg.huber_location_c);
  opts.flw = HuberConfig::location_rule(cfg.huber_location_c);
  opts.xi2 = HuberConfig::moment_rule(cfg.huber_xi2_c, cfg.xi2_epsilon);
  opts.threshold = cfg.threshold;
  return opts;
}

SummaryStat SimulationOutcome::summary(Estimator e, const std::string& metric) const {
  const std::string name(to_string(e));
  std::vector<double> xs;
  for (const auto& r : reports) {
    if (r.failed || r.estimator != name) continue;
    if (auto it = r.values.find(metric); it != r.values.end()) xs.push_back(it->second);
  }
  SummaryStat s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

namespace {

SimulationSpec simulation_spec(const ExperimentConfig& cfg) {
  SimulationSpec design;
  design.p = cfg.p;
  design.n = cfg.n;
  design.epsilon = cfg.epsilon;
  design.k_factors = cfg.k_factors;
  design.seed = cfg.seed;
  design.loading_scales.resize(static_cast<std::size_t>(cfg.k_factors));
  const std::vector<double> default_scales{1.0, 0.75 * 0.75, 0.5 * 0.5};
  for (std::size_t k = 0; k < design.loading_scales.size(); ++k) {
    design.loading_scales[k] = k < default_scales.size() ? default_scales[k] : 0.25;
  }
  return design;
}

std::vector<MetricsReport> run_replication(const ExperimentConfig& cfg, const PipelineOptions& opts,
                                           int r) {
  const auto design = simulation_spec(cfg);
  Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r));
  const ModelTruth truth = draw_truth(design, rng);
  const ReturnsPanel panel = simulate_panel(truth, rng);
  const TruthReference ref(truth);

  std::optional<KendallTau> tau;
  std::vector<MetricsReport> out;
  for (Estimator e : cfg.estimators) {
    try {
      if (!tau && e != Estimator::poet_s) tau = spatial_kendall_tau(panel);
      const Fit fit = fit_estimator(panel, e, cfg.k_factors, opts, tau ? &*tau : nullptr);
      out.push_back(evaluate(fit, truth, ref, r));
    } catch (const std::exception& ex) {
      MetricsReport failed;
      failed.replication = r;
      failed.estimator = std::string(to_string(e));
      failed.failed = true;
      failed.error = ex.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

void write_summary(std::ostream& out, const SimulationOutcome& outcome,
                   const std::vector<Estimator>& estimators,
                   const std::vector<std::string>& metrics) {
  out << "estimator,statistic";
  for (const auto& m : metrics) out << ',' << m;
  out << '\n';
  for (Estimator e : estimators) {
    for (const char* stat : {"mean", "sd"}) {
      out << to_string(e) << ',' << stat;
      for (const auto& m : metrics) {
        const SummaryStat s = outcome.summary(e, m);
        out << ',';
        if (s.count > 0) out << format_rounded(std::string(stat) == "mean" ? s.mean : s.sd);
      }
      out << '\n';
    }
  }
}

}  // namespace

SimulationOutcome run_simulation(const ExperimentConfig& cfg, std::ostream* console) {
  validate(cfg);
  const auto dir = prepare_out_dir(cfg);
  const PipelineOptions opts = pipeline_options(cfg);

  std::vector<std::vector<MetricsReport>> per_rep(static_cast<std::size_t>(cfg.replications));
  parallel_for(per_rep.size(), cfg.threads,
               [&](std::size_t r) { per_rep[r] = run_replication(cfg, opts, static_cast<int>(r)); });

  SimulationOutcome outcome;
  for (auto& rows : per_rep) {
    for (auto& row : rows) {
      if (row.failed) ++outcome.failures;
      outcome.reports.push_back(std::move(row));
    }
  }

  {
    auto out = open_output(dir / "replications.csv");
    out << metrics_csv_header() << '\n';
    for (const auto& r : outcome.reports) out << metrics_csv_row(r) << '\n';
  }
  {
    auto out = open_output(dir / "pilot_summary.csv");
    write_summary(out, outcome, cfg.estimators, pilot_metric_ids());
  }
  {
    auto out = open_output(dir / "poet_summary.csv");
    write_summary(out, outcome, cfg.estimators, poet_metric_ids());
  }
  write_metadata(dir, cfg);

  if (console) {
    *console << "p=" << cfg.p << " n=" << cfg.n << " epsilon=" << cfg.epsilon
             << " reps=" << cfg.replications << " seed=" << cfg.seed << '\n';
    for (const auto* ids : {&pilot_metric_ids(), &poet_metric_ids()}) {
      *console << std::left << std::setw(14) << "estimator";
      for (const auto& m : *ids) *console << std::setw(16) << m;
      *console << '\n';
      for (Estimator e : cfg.estimators) {
        *console << std::setw(14) << to_string(e);
        for (const auto& m : *ids) {
          const SummaryStat s = outcome.summary(e, m);
          *console << std::setw(16)
                   << (s.count ? format_rounded(s.mean) + " (" + format_rounded(s.sd) + ")" : "-");
        }
        *console << '\n';
      }
    }
    for (const auto& r : outcome.reports) {
      if (r.failed) *console << "replication " << r.replication << " " << r.estimator
                             << " failed: " << r.error << '\n';
    }
  }
  return outcome;
}

XiDiagnostic run_xi_diagnostic(const ExperimentConfig& cfg, std::ostream* console) {
  validate(cfg);
  const auto dir = prepare_out_dir(cfg);
  const PipelineOptions opts = pipeline_options(cfg);
  Rng rng = make_stream(cfg.seed, 0);
  const ModelTruth truth = draw_truth(simulation_spec(cfg), rng);
  const ReturnsPanel panel = simulate_panel(truth, rng);
  const IpsnPilots ipsn = fit_ipsn_pilots(panel, cfg.k_factors, IpsnOptions{opts.location});

  XiDiagnostic diag;
  diag.xi = truth.xi;
  diag.xi_hat_ipsn = ipsn.pilot.xi_hat;
  diag.xi_hat_selfnorm = (panel.data().rowwise() - ipsn.mu_hat.transpose()).rowwise().norm() /
                         std::sqrt(static_cast<double>(panel.p()));
  diag.max_dev_ipsn = (diag.xi_hat_ipsn.array() / diag.xi.array() - 1.0).abs().maxCoeff();
  diag.max_dev_selfnorm = (diag.xi_hat_selfnorm.array() / diag.xi.array() - 1.0).abs().maxCoeff();

  auto out = open_output(dir / "xi_diagnostic.csv");
  out << "t,xi,xi_hat_ipsn,ratio_ipsn,xi_hat_selfnorm,ratio_selfnorm\n";
  for (Eigen::Index t = 0; t < diag.xi.size(); ++t) {
    out << t + 1 << ',' << format_full(diag.xi(t)) << ',' << format_full(diag.xi_hat_ipsn(t)) << ','
        << format_full(diag.xi_hat_ipsn(t) / diag.xi(t)) << ','
        << format_full(diag.xi_hat_selfnorm(t)) << ','
        << format_full(diag.xi_hat_selfnorm(t) / diag.xi(t)) << '\n';
  }
  if (console) {
    *console << "max |xi_hat/xi - 1|: ipsn " << format_rounded(diag.max_dev_ipsn)
             << ", self-normalized " << format_rounded(diag.max_dev_selfnorm) << '\n';
  }
  return diag;
}

std::vector<BacktestResult> run_backtest(const ExperimentConfig& cfg, std::ostream* console) {
  validate(cfg);
  const DatedPanel panel = read_dated_csv(cfg.input);
  const auto dir = prepare_out_dir(cfg);

  std::vector<BacktestResult> results;
  for (Estimator e : cfg.estimators) {
    BacktestConfig bt;
    bt.window_days = cfg.window_days;
    bt.estimator = e;
    bt.k_factors = cfg.k_factors;
    bt.pipeline = pipeline_options(cfg);
    bt.annualization = cfg.annualization;
    bt.threads = cfg.threads;
    if (cfg.cross_validate_threshold && e != Estimator::equal_weight) {
      const Eigen::Index end = std::min(panel.n(), cfg.window_days + cfg.cv_holdout_days);
      const double c = cv_threshold(panel.slice(0, end), bt, cfg.cv_grid);
      bt.pipeline.threshold = ThresholdRule::fixed_constant(c);
      if (console) *console << to_string(e) << ": cross-validated threshold constant " << c << '\n';
    }
    results.push_back(rolling_backtest(panel, bt));
    const BacktestResult& res = results.back();

    auto wout = open_output(dir / (std::string(to_string(e)) + "_weights.csv"));
    wout << "date,k_factors,threshold_c";
    for (const auto& a : panel.assets) wout << ',' << a;
    wout << '\n';
    for (const auto& w : res.weights) {
      wout << w.date << ',' << w.k_factors << ',' << format_full(w.threshold_constant);
      for (Eigen::Index j = 0; j < w.weights.size(); ++j) wout << ',' << format_full(w.weights(j));
      wout << '\n';
    }
    auto rout = open_output(dir / (std::string(to_string(e)) + "_returns.csv"));
    rout << "date,return\n";
    for (std::size_t t = 0; t < res.dates.size(); ++t) {
      rout << res.dates[t] << ',' << format_full(res.returns(static_cast<Eigen::Index>(t))) << '\n';
    }
  }

  std::set<int> years;
  for (const auto& r : results) {
    for (const auto& [year, sd] : r.yearly_std) years.insert(year);
  }
  write_metadata(dir, cfg);
  auto sout = open_output(dir / "backtest_summary.csv");
  sout << "estimator,full_period";
  for (int y : years) sout << ',' << y;
  sout << '\n';
  for (const auto& r : results) {
    sout << r.estimator << ',' << format_rounded(r.full_period_std);
    std::map<int, double> by_year(r.yearly_std.begin(), r.yearly_std.end());
    for (int y : years) {
      sout << ',';
      if (auto it = by_year.find(y); it != by_year.end()) sout << format_rounded(it->second);
    }
    sout << '\n';
    if (console) {
      *console << std::left << std::setw(14) << r.estimator << " annualized std "
               << format_rounded(r.full_period_std) << '\n';
    }
  }
  return results;
}

}  // namespace robcov
