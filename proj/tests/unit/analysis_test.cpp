#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

#include "rkjl/analysis.hpp"
#include "rkjl/solvers.hpp"

namespace rkjl {
namespace {

// p_j by enumerating every n-subset of {0..m−1} and recording its smallest member.
RealVector p_by_enumeration(std::size_t m, std::size_t n) {
  RealVector hits(m, 0.0);
  std::size_t subsets = 0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != n) continue;
    ++subsets;
    hits[static_cast<std::size_t>(std::countr_zero(mask))] += 1.0;
  }
  for (double& h : hits) h /= static_cast<double>(subsets);
  return hits;
}

TEST(ComputeR, Examples) {
  EXPECT_NEAR(compute_R(DenseMatrix::identity(4)).R, 4.0, 1e-12);
  EXPECT_NEAR(compute_R(DenseMatrix{{1, 0}, {0, 2}}).R, 5.0, 1e-12);
  const BoundReport base = compute_R(DenseMatrix{{1, 0}, {0, 1}});
  const BoundReport dup = compute_R(DenseMatrix{{1, 0}, {0, 1}, {1, 0}});
  EXPECT_GT(dup.R, base.R);
  EXPECT_NEAR(dup.R, 3.0, 1e-12);
}

TEST(ComputeR, AtLeastN) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(15);
    const std::size_t m = n + rng.below(40);
    DenseMatrix A(m, n);
    for (double& e : A.data()) e = rng.normal();
    EXPECT_GE(compute_R(A).R, static_cast<double>(n) * (1 - 1e-10));
  }
}

TEST(ComputeR, GaussianTallMatricesAreWellConditioned) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    DenseMatrix A(400, 50);
    for (double& e : A.data()) e = rng.normal();
    EXPECT_LE(compute_R(A).R, 10.0 * 50);
  }
}

TEST(ComputeR, RankDeficientThrows) {
  EXPECT_THROW(compute_R(DenseMatrix{{1, 1}, {2, 2}}), RankDeficiencyError);
}

TEST(RkBoundCurve, Examples) {
  const auto c = rk_bound_curve(4.0, 1.0, 3);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0].second, 1.0);
  EXPECT_DOUBLE_EQ(c[1].second, 0.75);
  EXPECT_DOUBLE_EQ(c[2].second, 0.5625);
  EXPECT_EQ(c[3].first, 3u);
  const auto big = rk_bound_curve(1e6, 2.0, 10);
  for (std::size_t k = 1; k < big.size(); ++k) EXPECT_LT(big[k].second, big[k - 1].second);
  EXPECT_THROW(rk_bound_curve(1.0, 1.0, 3), ParameterError);
  EXPECT_THROW(rk_bound_curve(0.5, 1.0, 3), ParameterError);
}

TEST(NoisyBound, Examples) {
  EXPECT_NEAR(noisy_rk_bound(4.0, 1.0, 0, 0.1), 1.2, 1e-15);
  EXPECT_NEAR(noise_floor(4.0, 0.1), 0.2, 1e-15);
  EXPECT_NEAR(noisy_rk_bound(4.0, 1.0, 2, 0.0), 0.75, 1e-15);
  EXPECT_NEAR(noisy_rk_bound(2.0, 3.0, 100000, 0.5), std::sqrt(2.0) * 0.5, 1e-12);
  EXPECT_THROW(noisy_rk_bound(4.0, 1.0, 0, -0.1), ParameterError);
}

TEST(GammaOfNoise, Examples) {
  const DenseMatrix A{{2, 0}, {0, 4}};
  EXPECT_DOUBLE_EQ(gamma_of_noise(A, RealVector{1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(gamma_of_noise(A, RealVector{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(gamma_of_noise(A, RealVector{-1, 4}), 1.0);
  EXPECT_THROW(gamma_of_noise(DenseMatrix{{0, 0}, {1, 0}}, RealVector{1, 0}), ParameterError);
  EXPECT_NO_THROW(gamma_of_noise(DenseMatrix{{0, 0}, {1, 0}}, RealVector{0, 1}));
  EXPECT_THROW(gamma_of_noise(A, RealVector{1}), DimensionError);
}

TEST(PVector, WorkedExample) {
  const PVector pv = p_vector(6, 3);
  const RealVector expected{0.5, 0.3, 0.15, 0.05, 0.0, 0.0};
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(pv.p[j], expected[j], 1e-15);
}

TEST(PVector, EdgeCases) {
  const PVector one = p_vector(5, 1);
  for (double p : one.p) EXPECT_NEAR(p, 0.2, 1e-15);
  const PVector all = p_vector(5, 5);
  EXPECT_EQ(all.p[0], 1.0);
  for (std::size_t j = 1; j < 5; ++j) EXPECT_EQ(all.p[j], 0.0);
  EXPECT_THROW(p_vector(3, 4), ParameterError);
  EXPECT_THROW(p_vector(3, 0), ParameterError);
}

TEST(PVector, MatchesSubsetEnumeration) {
  for (std::size_t m = 1; m <= 12; ++m) {
    for (std::size_t n = 1; n <= m; ++n) {
      const PVector pv = p_vector(m, n);
      const RealVector oracle = p_by_enumeration(m, n);
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        EXPECT_NEAR(pv.p[j], oracle[j], 1e-12) << "m=" << m << " n=" << n << " j=" << j + 1;
        if (j > 0) {
          EXPECT_LE(pv.p[j], pv.p[j - 1]);
        }
        sum += pv.p[j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(PVector, LargeMStaysFinite) {
  const PVector pv = p_vector(100000, 1000);
  double sum = 0.0;
  for (double p : pv.p) {
    ASSERT_TRUE(std::isfinite(p));
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Beta, EqualGainsGiveZero) {
  const PVector pv = p_vector(6, 3);
  const RealVector g(6, 0.7);
  EXPECT_NEAR(beta_improvement(g, pv), 0.0, 1e-15);
  EXPECT_NEAR(exact_selection_bound(g, pv, 2.0), 2.0, 1e-15);
}

TEST(Beta, SingleCandidateGivesZero) {
  const PVector pv = p_vector(5, 1);
  const RealVector g{5, 4, 3, 2, 1};
  EXPECT_NEAR(beta_improvement(g, pv), 0.0, 1e-14);
}

TEST(Beta, WorkedExample) {
  // p = (0.5, 0.3, 0.15, 0.05, 0, 0), 1/m = 1/6.
  const PVector pv = p_vector(6, 3);
  const RealVector g{6, 5, 4, 3, 2, 1};
  const double expected = 0.5 * 6 + 0.3 * 5 + 0.15 * 4 + 0.05 * 3 - 21.0 / 6.0;
  EXPECT_NEAR(beta_improvement(g, pv), expected, 1e-13);
  EXPECT_NEAR(theorem1_bound(g, pv, 0.0, 10.0), 10.0 - expected, 1e-13);
}

TEST(Beta, UnsortedGainsViolateContract) {
  const PVector pv = p_vector(3, 2);
  EXPECT_THROW(beta_improvement(RealVector{1, 2, 3}, pv), ContractError);
  EXPECT_THROW(beta_improvement(RealVector{3, 2}, pv), DimensionError);
}

TEST(ImprovementBound, NeverWorseThanRkAndMonotoneInDelta) {
  const PVector pv = p_vector(6, 3);
  const RealVector g{6, 5, 4, 3, 2, 1};
  EXPECT_NEAR(theorem1_bound(g, pv, 100.0, 10.0), 10.0, 1e-15);
  double prev = -1.0;
  for (double delta : {0.0, 0.1, 0.5, 1.0, 5.0}) {
    const double b = theorem1_bound(g, pv, delta, 10.0);
    EXPECT_LE(b, 10.0);
    EXPECT_GE(b, prev);
    prev = b;
  }
  EXPECT_THROW(theorem1_bound(g, pv, -0.1, 10.0), ParameterError);
}

// Unit rows, b = 0, fixed x_k: projecting onto row j leaves ‖x_k‖² − ⟨a_j, x_k⟩².
TEST(ExactSelection, MonteCarloSingleStep) {
  Rng rng(42);
  const std::size_t m = 12, n = 4, s = 4;
  DenseMatrix A(m, n);
  for (double& e : A.data()) e = rng.normal();
  for (std::size_t i = 0; i < m; ++i) {
    const double nrm = norm2(A.row(i));
    for (double& e : A.row(i)) e /= nrm;
  }
  const LinearSystem sys(A, RealVector(m, 0.0));
  const RealVector xk = gaussian_vector(rng, n, 1.0);
  const double e_k = dot(xk, xk);

  RealVector gains(m);
  for (std::size_t i = 0; i < m; ++i) gains[i] = std::pow(dot(A.row(i), xk), 2);
  std::sort(gains.begin(), gains.end(), std::greater<>());
  double rk_expected = e_k;
  for (double g : gains) rk_expected -= g / m;
  const PVector pv = p_vector(m, s);
  const double bound = exact_selection_bound(gains, pv, rk_expected);

  double exact = e_k;
  for (std::size_t j = 0; j < m; ++j) exact -= pv.p[j] * gains[j];
  EXPECT_NEAR(bound, exact, 1e-12 * e_k);

  SolverConfig cfg;
  cfg.method = Method::oracle;
  cfg.candidates = s;
  cfg.replacement = Replacement::without;
  StepWorkspace ws;
  const std::size_t N = 100000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t t = 0; t < N; ++t) {
    IterateState st;
    st.x = xk;
    step_oracle(st, sys, cfg, rng, ws);
    const double e = dot(st.x, st.x);
    sum += e;
    sq += e * e;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sq / N - mean * mean) / N);
  EXPECT_LE(mean, bound + 3 * se);
  EXPECT_GE(mean, bound - 3 * se);
  EXPECT_LT(mean, rk_expected);
}

}  // namespace
}  // namespace rkjl
