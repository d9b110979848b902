#include "robcov/robust_scalar.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace robcov {

namespace {

struct Evaluation {
  double g = 0.0;
  // Root of the linear piece containing m; NaN when every sample is clipped.
  double piece_root = std::numeric_limits<double>::quiet_NaN();
};

Evaluation evaluate(const Eigen::Ref<const Eigen::VectorXd>& z, double h, double m) {
  Evaluation e;
  double inner_sum = 0.0;
  Eigen::Index inner = 0, above = 0, below = 0;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    const double d = z(t) - m;
    if (d > h) {
      e.g += h;
      ++above;
    } else if (d < -h) {
      e.g -= h;
      ++below;
    } else {
      e.g += d;
      inner_sum += z(t);
      ++inner;
    }
  }
  if (inner > 0) {
    e.piece_root = (inner_sum + h * static_cast<double>(above - below)) / static_cast<double>(inner);
  }
  return e;
}

}  // namespace

double resolve_h(const HuberConfig& cfg, Eigen::Index n, Eigen::Index p, double constant) {
  double h = 0.0;
  switch (cfg.rule) {
    case HuberRule::location: {
      const double log_p = std::log(static_cast<double>(std::max<Eigen::Index>(p, 2)));
      h = constant * std::sqrt(static_cast<double>(n) / log_p);
      break;
    }
    case HuberRule::moment: {
      if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("resolve_h: epsilon must be > 0");
      const double rate = std::min(1.0 / (1.0 + cfg.epsilon / 2.0), 0.5);
      h = constant * std::pow(static_cast<double>(n), rate);
      break;
    }
    case HuberRule::fixed:
      h = cfg.h;
      break;
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("resolve_h: truncation level must be positive, got " +
                                std::to_string(h));
  }
  return h;
}

double resolve_h(const HuberConfig& cfg, Eigen::Index n, Eigen::Index p) {
  return resolve_h(cfg, n, p, cfg.constant);
}

double huber_location(const Eigen::Ref<const Eigen::VectorXd>& samples, double h) {
  const Eigen::Index n = samples.size();
  if (n == 0) throw std::invalid_argument("huber_location: empty sample");
  if (!(h > 0.0)) throw std::invalid_argument("huber_location: h must be > 0");

  double lo = samples.minCoeff() - h;
  double hi = samples.maxCoeff() + h;
  const double tol = static_cast<double>(n) * 1e-12;

  for (int iter = 0; iter < 2000; ++iter) {
    const double m = 0.5 * (lo + hi);
    const Evaluation e = evaluate(samples, h, m);
    if (std::isfinite(e.piece_root) && e.piece_root >= lo && e.piece_root <= hi) {
      const Evaluation at_root = evaluate(samples, h, e.piece_root);
      if (std::abs(at_root.g) <= tol) return e.piece_root;
      (at_root.g > 0.0 ? lo : hi) = e.piece_root;
    }
    if (std::abs(e.g) <= tol) return m;
    if (e.g > 0.0) {
      lo = std::max(lo, m);
    } else {
      hi = std::min(hi, m);
    }
    if (hi - lo <= 1e-12 * (1.0 + std::abs(m))) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

double select_huber_constant(const Eigen::MatrixXd& series, const HuberConfig& cfg,
                             Eigen::Index p) {
  if (cfg.cv_grid.empty()) return cfg.constant;
  const Eigen::Index n = series.rows();
  const Eigen::Index folds = std::min<Eigen::Index>(std::max(cfg.cv_folds, 2), n);
  if (n < 2) throw std::invalid_argument("select_huber_constant: need at least 2 observations");

  double best_c = cfg.cv_grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd train;
  for (double c : cfg.cv_grid) {
    double score = 0.0;
    for (Eigen::Index f = 0; f < folds; ++f) {
      const Eigen::Index begin = f * n / folds;
      const Eigen::Index end = (f + 1) * n / folds;
      const Eigen::Index n_test = end - begin;
      const Eigen::Index n_train = n - n_test;
      if (n_test == 0 || n_train == 0) continue;
      const double h = resolve_h(cfg, n_train, p, c);
      train.resize(n_train);
      for (Eigen::Index j = 0; j < series.cols(); ++j) {
        train.head(begin) = series.col(j).head(begin);
        train.tail(n - end) = series.col(j).tail(n - end);
        const double m = huber_location(train, h);
        double resid = 0.0;
        for (Eigen::Index t = begin; t < end; ++t) resid += huber_psi(series(t, j) - m, h);
        score += std::abs(resid) / static_cast<double>(n_test);
      }
    }
    if (score < best_score || (score == best_score && c < best_c)) {
      best_score = score;
      best_c = c;
    }
  }
  return best_c;
}

Eigen::VectorXd huber_mean_vector(const ReturnsPanel& panel, const HuberConfig& cfg) {
  const auto& y = panel.data();
  const double c = select_huber_constant(y, cfg, panel.p());
  const double h = resolve_h(cfg, panel.n(), panel.p(), c);
  Eigen::VectorXd mu(panel.p());
  for (Eigen::Index i = 0; i < panel.p(); ++i) mu(i) = huber_location(y.col(i), h);
  return mu;
}

double estimate_xi2(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                    const HuberConfig& cfg) {
  if (mu_hat.size() != panel.p()) throw std::invalid_argument("estimate_xi2: mu_hat length");
  const Eigen::MatrixXd w =
      (panel.data().rowwise() - mu_hat.transpose()).rowwise().squaredNorm() /
      static_cast<double>(panel.p());
  const double c = select_huber_constant(w, cfg, panel.p());
  return huber_location(w.col(0), resolve_h(cfg, panel.n(), panel.p(), c));
}

Eigen::MatrixXd huber_pairwise_moment(const ReturnsPanel& panel, const Eigen::VectorXd& mu_hat,
                                      const HuberConfig& cfg) {
  const Eigen::Index p = panel.p();
  if (mu_hat.size() != p) throw std::invalid_argument("huber_pairwise_moment: mu_hat length");
  const Eigen::MatrixXd d = panel.data().rowwise() - mu_hat.transpose();
  // Cross-validation, when requested, runs on the p squared-deviation series
  // only; the full p(p+1)/2 set would dominate the fit.
  double c = cfg.constant;
  if (!cfg.cv_grid.empty()) c = select_huber_constant(d.array().square().matrix(), cfg, p);
  const double h = resolve_h(cfg, panel.n(), p, c);

  Eigen::MatrixXd m(p, p);
  Eigen::VectorXd prod(panel.n());
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i < p; ++i) {
      prod = d.col(i).cwiseProduct(d.col(j));
      m(i, j) = huber_location(prod, h);
      m(j, i) = m(i, j);
    }
  }
  return (m + m.transpose()) / 2.0;
}

}  // namespace robcov
