#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "robcov/linalg.hpp"
#include "robcov/rng.hpp"

using namespace robcov;

namespace {

// Number of eigenvalues of symmetric `a` below x, by Sylvester's law of
// inertia on an unpivoted LDL' of a - xI written out by hand.
int count_below(const Eigen::MatrixXd& a, double x) {
  const Eigen::Index n = a.rows();
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m[i][j] = a(i, j) - (i == j ? x : 0.0);
  int negatives = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    double d = m[k][k];
    if (d == 0.0) d = 1e-300;
    if (d < 0) ++negatives;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = m[i][k] / d;
      for (Eigen::Index j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return negatives;
}

// Eigenvalues, descending, by bisection on the inertia count.
std::vector<double> oracle_eigenvalues(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const double bound = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  std::vector<double> out;
  for (Eigen::Index k = n; k >= 1; --k) {
    double lo = -bound, hi = bound;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(a, mid) >= k) hi = mid; else lo = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a + a.transpose();
}

}  // namespace

TEST(SymmetricEigenvalues, MatchesInertiaBisectionOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_symmetric(6, rng);
    const Eigen::VectorXd got = symmetric_eigenvalues(a);
    const std::vector<double> want = oracle_eigenvalues(a);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(got(i), want[i], 1e-9);
  }
}

TEST(SymmetricEigenvalues, HandExample) {
  Eigen::Matrix2d a;
  a << 2, 1, 1, 2;
  const Eigen::VectorXd ev = symmetric_eigenvalues(a);
  EXPECT_NEAR(ev(0), 3.0, 1e-14);
  EXPECT_NEAR(ev(1), 1.0, 1e-14);
}

TEST(LeadingEigvecs, ResidualAndOrthonormality) {
  Rng rng(9);
  const Eigen::MatrixXd a = random_symmetric(12, rng);
  const auto pairs = leading_eigvecs(a, 4);
  ASSERT_EQ(pairs.vectors.cols(), 4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LT((a * pairs.vectors.col(j) - pairs.values(j) * pairs.vectors.col(j)).norm(), 1e-10);
    if (j > 0) {
      EXPECT_GE(pairs.values(j - 1), pairs.values(j));
    }
  }
  EXPECT_LT((pairs.vectors.transpose() * pairs.vectors - Eigen::MatrixXd::Identity(4, 4))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(LeadingEigvecs, SignRuleMakesLargestEntryPositive) {
  Rng rng(10);
  const Eigen::MatrixXd a = random_symmetric(7, rng);
  const auto pairs = leading_eigvecs(a, 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::Index arg;
    pairs.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(pairs.vectors(arg, j), 0.0);
  }
  const auto again = leading_eigvecs(a, 3);
  EXPECT_LT((again.vectors - pairs.vectors).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LeadingEigvecs, RejectsBadArguments) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(leading_eigvecs(a, 0), std::invalid_argument);
  EXPECT_THROW(leading_eigvecs(a, 4), std::invalid_argument);
  a(0, 1) = 1.0;
  EXPECT_THROW(leading_eigvecs(a, 1), std::invalid_argument);
  EXPECT_THROW(leading_eigvecs(Eigen::MatrixXd(2, 3), 1), std::invalid_argument);
}

TEST(FixColumnSigns, FirstEntryWinsTies) {
  Eigen::MatrixXd v(2, 1);
  v << -1, 1;
  fix_column_signs(v);
  EXPECT_EQ(v(0, 0), 1.0);
  EXPECT_EQ(v(1, 0), -1.0);
}

TEST(SymSqrt, SquaresBack) {
  Rng rng(3);
  const Eigen::MatrixXd b = random_symmetric(5, rng);
  const Eigen::MatrixXd s = b * b + Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd r = sym_sqrt(s);
  EXPECT_LT((r * r - s).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::MatrixXd w = sym_inv_sqrt(s);
  EXPECT_LT((w * s * w - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SymSqrt, RejectsIndefinite) {
  Eigen::Matrix2d a;
  a << 1, 0, 0, -1;
  EXPECT_THROW(sym_sqrt(a), NumericError);
  EXPECT_THROW(sym_inv_sqrt(a), std::invalid_argument);
}

TEST(Templates, LongDoubleInstantiation) {
  MatrixX<long double> a(2, 2);
  a << 4, 0, 0, 9;
  const MatrixX<long double> r = sym_sqrt(a);
  EXPECT_NEAR(static_cast<double>(r(1, 1)), 3.0, 1e-15);
}

TEST(Streams, DistinctAndReproducible) {
  Rng a = make_stream(5, 0), b = make_stream(5, 0), c = make_stream(5, 1), d = make_stream(6, 0);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
}
