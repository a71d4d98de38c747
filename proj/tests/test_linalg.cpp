#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "urbanrhythm/error.hpp"
#include "urbanrhythm/linalg.hpp"

using namespace urbanrhythm;
using linalg::DenseMatrix;
using linalg::RetentionRule;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix m(rows, cols);
  for (auto& v : m.values()) v = g(rng);
  return m;
}

}  // namespace

TEST(Linalg, RectangleCornersGiveKnownRatios) {
  const DenseMatrix corners(4, 2, {1, 0.5, 1, -0.5, -1, 0.5, -1, -0.5});
  const auto basis = linalg::fit_pca(corners, RetentionRule::min_ratio(0.03));
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_NEAR(basis.explained_variance_ratio[0], 0.8, 1e-12);
  EXPECT_NEAR(basis.explained_variance_ratio[1], 0.2, 1e-12);
  EXPECT_NEAR(basis.eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(basis.eigenvalues[1], 0.25, 1e-12);

  const auto p = linalg::project(basis, DenseMatrix(1, 2, {1.0, 0.5}));
  EXPECT_NEAR(std::abs(p(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(p(0, 1)), 0.5, 1e-12);
  // Largest entry of each component is positive.
  EXPECT_NEAR(basis.components(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(basis.components(1, 1), 1.0, 1e-12);
}

TEST(Linalg, IdenticalRowsGiveSingleConventionComponent) {
  const DenseMatrix same(5, 3, {2, 7, 1, 2, 7, 1, 2, 7, 1, 2, 7, 1, 2, 7, 1});
  const auto basis = linalg::fit_pca(same, RetentionRule::min_ratio(0.03));
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_EQ(basis.explained_variance_ratio[0], 1.0);
  EXPECT_EQ(basis.components(0, 0), 1.0);
  EXPECT_EQ(basis.components(0, 1), 0.0);
  EXPECT_EQ(basis.mean, (std::vector<double>{2, 7, 1}));
  const auto p = linalg::project(basis, same);
  for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Linalg, FixedKCapsAtRequestAndRank) {
  const auto wide = random_matrix(300, 150, 1);
  EXPECT_EQ(linalg::fit_pca(wide, RetentionRule::fixed_k(128)).size(), 128u);
  // 20 samples span at most 19 centred directions.
  const auto few = random_matrix(20, 150, 2);
  EXPECT_EQ(linalg::fit_pca(few, RetentionRule::fixed_k(128)).size(), 19u);
}

TEST(Linalg, MinRatioKeepsStrictlyGreater) {
  // Variances 1 and 1/9 along the axes: ratios 0.9 and 0.1.
  const DenseMatrix m(4, 2, {1, 1.0 / 3, 1, -1.0 / 3, -1, 1.0 / 3, -1, -1.0 / 3});
  EXPECT_EQ(linalg::fit_pca(m, RetentionRule::min_ratio(0.05)).size(), 2u);
  EXPECT_EQ(linalg::fit_pca(m, RetentionRule::min_ratio(0.5)).size(), 1u);
  EXPECT_EQ(linalg::fit_pca(m, RetentionRule::min_ratio(0.95)).size(), 1u);
}

TEST(Linalg, Errors) {
  EXPECT_THROW(linalg::fit_pca(DenseMatrix(1, 3), RetentionRule::min_ratio(0.1)), Error);
  DenseMatrix bad(3, 2);
  bad(1, 1) = std::nan("");
  try {
    linalg::fit_pca(bad, RetentionRule::min_ratio(0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
  }
  const auto basis = linalg::fit_pca(random_matrix(10, 3, 3), RetentionRule::all());
  try {
    linalg::project(basis, DenseMatrix(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Linalg, EigenpairsMatchJacobiOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 2 + seed % 7;
    const auto samples = random_matrix(40, d, 100 + seed);
    const auto cov = linalg::covariance(samples);
    oracle::Mat a(d, oracle::Vec(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a[i][j] = cov(i, j);
    const auto want = oracle::jacobi(a);
    const auto got = linalg::eigen_symmetric(cov);
    for (std::size_t k = 0; k < d; ++k) {
      EXPECT_NEAR(got.values[k], want.values[k], 1e-10);
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(got.vectors(k, i), want.vectors[k][i], 1e-8);
    }
  }
}

TEST(Linalg, BasisInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto samples = random_matrix(30, 6, seed);
    const auto basis = linalg::fit_pca(samples, RetentionRule::all());
    const auto cov = linalg::covariance(samples);
    double sum = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      sum += basis.explained_variance_ratio[k];
      if (k) {
        EXPECT_LE(basis.explained_variance_ratio[k], basis.explained_variance_ratio[k - 1]);
      }
      for (std::size_t l = 0; l < basis.size(); ++l) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 6; ++i) dot += basis.components(k, i) * basis.components(l, i);
        EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-8);
      }
      // Cov v = lambda v.
      for (std::size_t i = 0; i < 6; ++i) {
        double cv = 0.0;
        for (std::size_t j = 0; j < 6; ++j) cv += cov(i, j) * basis.components(k, j);
        EXPECT_LE(std::abs(cv - basis.eigenvalues[k] * basis.components(k, i)), 1e-7 * (1 + basis.eigenvalues[k]));
      }
    }
    EXPECT_LE(sum, 1.0 + 1e-8);
    EXPECT_EQ(basis, linalg::fit_pca(samples, RetentionRule::all()));
  }
}

TEST(Linalg, ProjectionRoundTripAndContraction) {
  const auto samples = random_matrix(25, 5, 9);
  const auto full = linalg::fit_pca(samples, RetentionRule::all());
  const auto back = linalg::reconstruct(full, linalg::project(full, samples));
  for (std::size_t i = 0; i < samples.values().size(); ++i) EXPECT_NEAR(back.values()[i], samples.values()[i], 1e-8);

  DenseMatrix mean_row(1, 5, full.mean);
  const auto centre = linalg::project(full, mean_row);
  for (double v : centre.values()) EXPECT_NEAR(v, 0.0, 1e-12);

  const auto part = linalg::fit_pca(samples, RetentionRule::fixed_k(2));
  const auto p = linalg::project(part, samples);
  for (std::size_t a = 0; a < 25; ++a) {
    for (std::size_t b = a + 1; b < 25; ++b) {
      double raw = 0, red = 0;
      for (std::size_t k = 0; k < 5; ++k) raw += std::pow(samples(a, k) - samples(b, k), 2);
      for (std::size_t k = 0; k < 2; ++k) red += std::pow(p(a, k) - p(b, k), 2);
      EXPECT_LE(red, raw + 1e-9);
    }
  }
}

TEST(Linalg, DualRouteMatchesPrimal) {
  // 12 samples in 30 dimensions goes through the Gram matrix; the oracle
  // always decomposes the full covariance.
  const auto samples = random_matrix(12, 30, 77);
  const auto basis = linalg::fit_pca(samples, RetentionRule::fixed_k(5));
  oracle::Mat rows(12, oracle::Vec(30));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 30; ++j) rows[i][j] = samples(i, j);
  const auto want = oracle::pca(rows, -1.0);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(basis.explained_variance_ratio[k], want.ratios[k], 1e-10);
    for (std::size_t j = 0; j < 30; ++j) EXPECT_NEAR(basis.components(k, j), want.components[k][j], 1e-8);
  }
}

TEST(Linalg, KltDecorrelates) {
  const auto samples = random_matrix(100, 3, 5);
  auto mixed = samples;
  for (std::size_t r = 0; r < 100; ++r) {
    mixed(r, 1) += 0.8 * samples(r, 0);
    mixed(r, 2) += 0.5 * samples(r, 1) - 0.3 * samples(r, 0);
  }
  const auto klt = linalg::fit_klt(mixed);
  ASSERT_EQ(klt.size(), 3u);
  const auto cov = linalg::covariance(linalg::project(klt, mixed));
  const double top = std::max({cov(0, 0), cov(1, 1), cov(2, 2)});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_LE(std::abs(cov(i, j)), 1e-6 * top);
      }
}

TEST(Linalg, KltOfDuplicatedChannel) {
  auto m = random_matrix(50, 2, 8);
  for (std::size_t r = 0; r < 50; ++r) m(r, 1) = m(r, 0);
  const auto klt = linalg::fit_klt(m);
  ASSERT_EQ(klt.size(), 2u);
  EXPECT_NEAR(klt.eigenvalues[1], 0.0, 1e-12);
  const auto p = linalg::project(klt, m);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_NEAR(p(r, 1), 0.0, 1e-12);
}

TEST(Linalg, KltOfDiagonalInputIsSignedPermutation) {
  // Channel variances 4, 1, 9 and no correlation.
  DenseMatrix m(4, 3, {2, 1, 3, -2, -1, 3, 2, -1, -3, -2, 1, -3});
  const auto klt = linalg::fit_klt(m);
  const std::vector<std::size_t> axis{2, 0, 1};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(klt.components(k, i), i == axis[k] ? 1.0 : 0.0, 1e-12);
}

TEST(Linalg, SignConventionPicksFirstOfNearTies) {
  std::vector<double> v{-0.7071067811865476, 0.0, 0.0, 0.7071067811865475};
  linalg::normalize_sign(v);
  EXPECT_GT(v[0], 0.0);
  std::vector<double> w{0.1, -0.9, 0.3};
  linalg::normalize_sign(w);
  EXPECT_EQ(w, (std::vector<double>{-0.1, 0.9, -0.3}));
}

TEST(Linalg, TiedEigenvaluesOrderedLexicographically) {
  const DenseMatrix identity(2, 2, {1, 0, 0, 1});
  const auto eig = linalg::eigen_symmetric(identity);
  // (0,1) sorts before (1,0).
  EXPECT_EQ(eig.vectors(0, 0), 0.0);
  EXPECT_EQ(eig.vectors(0, 1), 1.0);
  EXPECT_EQ(eig.vectors(1, 0), 1.0);
}
