#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace pcsemu;
using namespace pcsemu::testing;

namespace {

std::vector<double> to_vec(std::span<const double> v) { return {v.begin(), v.end()}; }

std::vector<double> as_doubles(const Config& x) { return {x.begin(), x.end()}; }

}  // namespace

TEST(Sigma, DiagonalAndOffDiagonal) {
  EXPECT_EQ(sigma(0, 0, 2), 1);
  EXPECT_EQ(sigma(0, 1, 2), -1);
  EXPECT_EQ(sigma(2, 2, 3), 1);
  EXPECT_THROW(sigma(1, 0, 2), ValidationError);
  EXPECT_THROW(sigma(0, 2, 2), ValidationError);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(to_vec(normalize(Backlog({0, 0})).values()), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(to_vec(normalize(Backlog({1, 3})).values()), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(to_vec(normalize(Backlog({2, 0, 2})).values()), (std::vector<double>{0.5, 0.0, 0.5}));
}

TEST(Normalize, RejectsBadInput) {
  EXPECT_THROW(Backlog(std::vector<std::int64_t>{}), ValidationError);
  EXPECT_THROW(Backlog({1, -1}), ValidationError);
  EXPECT_THROW(NormalizedBacklog({0.5, 0.6}), ValidationError);
  EXPECT_NO_THROW(NormalizedBacklog({0.0, 0.0}));
}

TEST(ScheduleSetType, Validation) {
  EXPECT_THROW(ScheduleSet(std::vector<Config>{}), ValidationError);
  EXPECT_THROW(ScheduleSet({{0, 0}, {1}}), ValidationError);
  EXPECT_THROW(ScheduleSet({{0, -1}}), ValidationError);
  EXPECT_THROW(ScheduleSet({{1, 0}, {1, 0}}), ValidationError);
  const auto S = demo_S();
  EXPECT_EQ(S.index_of(Config{2, 1}), 2u);
  EXPECT_FALSE(S.contains(Config{1, 1}));
}

TEST(TriangularLayout, RowMajorUpperTriangle) {
  EXPECT_EQ(TriangularParams::index(3, 0, 0), 0u);
  EXPECT_EQ(TriangularParams::index(3, 0, 2), 2u);
  EXPECT_EQ(TriangularParams::index(3, 1, 1), 3u);
  EXPECT_EQ(TriangularParams::index(3, 1, 2), 4u);
  EXPECT_EQ(TriangularParams::index(3, 2, 2), 5u);
  EXPECT_THROW(TriangularParams(2, {0.5, 0.5}), ValidationError);
}

TEST(PcsScore, Examples) {
  const auto b = demo_b();
  EXPECT_NEAR(pcs_score(Config{2, 1}, std::vector<double>{0.25, 0.75}, b), 0.275, 1e-15);
  EXPECT_NEAR(pcs_score(Config{0, 2}, std::vector<double>{0.0, 1.0}, b), 0.8, 1e-15);
  EXPECT_EQ(pcs_score(Config{2, 1}, std::vector<double>{0.0, 0.0}, b), 0.0);
  EXPECT_THROW(pcs_score(Config{1, 1, 1}, std::vector<double>{0.5, 0.5}, b), ValidationError);
}

TEST(Mu, Examples) {
  const auto b = demo_b();
  const auto S = demo_S();
  EXPECT_EQ(mu(NormalizedBacklog({0.0, 0.0}), b, S), (Config{0, 0}));
  EXPECT_EQ(mu(NormalizedBacklog({0.0, 1.0}), b, S), (Config{0, 2}));
  EXPECT_EQ(mu(NormalizedBacklog({1.0, 0.0}), b, S), (Config{2, 1}));
}

TEST(Mu, ScoreTablesMatchOracle) {
  const auto b = demo_b();
  const auto S = demo_S();
  const std::vector<double> at01{0.0, -0.3, -0.2, 0.8};
  const std::vector<double> at10{0.0, 1.0, 1.7, -0.6};
  for (std::size_t k = 0; k < S.size(); ++k) {
    EXPECT_NEAR(pcs_score(S[k], std::vector<double>{0.0, 1.0}, b), at01[k], 1e-15);
    EXPECT_NEAR(pcs_score(S[k], std::vector<double>{1.0, 0.0}, b), at10[k], 1e-15);
  }
}

TEST(Mu, TieGoesToEarliestConfiguration) {
  // Equal scores for (1,0) and (0,1) under a symmetric diagonal expert.
  const TriangularParams b(2, {0.5, 0.0, 0.5});
  const ScheduleSet S1({{1, 0}, {0, 1}});
  const ScheduleSet S2({{0, 1}, {1, 0}});
  const NormalizedBacklog y({0.5, 0.5});
  EXPECT_EQ(mu(y, b, S1), (Config{1, 0}));
  EXPECT_EQ(mu(y, b, S2), (Config{0, 1}));
}

TEST(ReconstructMatrix, CanonicalForm) {
  // Diagonal carries 2 b(i,i) so <s, B x> reproduces the triangular score.
  const auto B = reconstruct_matrix(demo_b());
  EXPECT_EQ(B.data, (std::vector<double>{1.0, -0.3, -0.3, 0.4}));
  const auto D = reconstruct_matrix(TriangularParams(3, {1.0 / 3, 0, 0, 1.0 / 3, 0, 1.0 / 3}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(D(i, j), i == j ? 2.0 / 3 : 0.0);
  const auto T = reconstruct_matrix(TriangularParams(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_EQ(T.data, (std::vector<double>{2.0 / 3, -1.0 / 3, -1.0 / 3, 2.0 / 3}));
}

TEST(MatrixScore, Examples) {
  const auto B = reconstruct_matrix(demo_b());
  EXPECT_NEAR(matrix_score(Config{2, 1}, std::vector<double>{0.25, 0.75}, B), 0.275, 1e-15);
  EXPECT_EQ(matrix_score(Config{2, 1}, std::vector<double>{0.0, 0.0}, B), 0.0);
  EXPECT_EQ(matrix_score(Config{0, 0}, std::vector<double>{0.3, 0.7}, B), 0.0);
}

TEST(ComputeD, Examples) {
  EXPECT_EQ(compute_D(demo_S()), 2);
  EXPECT_EQ(compute_D(ScheduleSet({{3, 1}})), 0);
  EXPECT_EQ(compute_D(ScheduleSet({{0, 0}, {5, 0}})), 5);
}

TEST(ValidateExpert, Examples) {
  EXPECT_TRUE(validate_expert(demo_expert()).empty());

  const auto zero_diag = validate_expert({TriangularParams(2, {0.0, 0.5, 0.5}), demo_S()});
  ASSERT_FALSE(zero_diag.empty());
  EXPECT_NE(zero_diag.front().find("diagonal entry not positive"), std::string::npos);

  const auto indefinite = validate_expert({TriangularParams(2, {0.1, 0.8, 0.1}), demo_S()});
  ASSERT_EQ(indefinite.size(), 1u);
  EXPECT_EQ(indefinite.front(), "not positive-definite");

  const auto unnormalized = validate_expert({TriangularParams(2, {1.0, 0.3, 0.2}), demo_S()});
  ASSERT_EQ(unnormalized.size(), 1u);
  EXPECT_EQ(unnormalized.front(), "entries do not sum to 1");
}

TEST(ValidateExpert, PositiveDefinitenessMatchesLeadingMinors) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 5));
    std::vector<double> e(triangular_size(n));
    for (auto& v : e) v = uniform(rng, 0.01, 1.0);
    const TriangularParams b(n, e);
    const auto B = reconstruct_matrix(b);
    std::vector<std::vector<double>> A(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) A[i][j] = B(i, j);
    const auto minors = leading_minors(A);
    bool all_positive = minors.size() == n;
    for (double m : minors) all_positive = all_positive && m > 1e-9;
    bool clearly_not = false;
    for (double m : minors) clearly_not = clearly_not || m < -1e-9;
    if (all_positive) {
      EXPECT_TRUE(is_positive_definite(B));
    }
    if (clearly_not) {
      EXPECT_FALSE(is_positive_definite(B));
    }
  }
}

// ---------------------------------------------------------------------------
// Properties.

TEST(PcsProperties, ScoreMatchesExplicitOracleAndMatrixForm) {
  Rng rng(1);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 6));
    std::vector<double> e(triangular_size(n));
    for (auto& v : e) v = uniform(rng, 0.0, 1.0);
    const TriangularParams b(n, e);
    const auto x = random_backlog(rng, n);
    const auto y = normalize(Backlog(x));
    Config s(n);
    for (auto& v : s) v = uniform_int(rng, 0, 4);
    const double score = pcs_score(s, y, b);
    EXPECT_NEAR(score, oracle_score(s, to_vec(y.values()), as_pair_map(b)), 1e-12);
    EXPECT_NEAR(score, matrix_score(s, y.values(), reconstruct_matrix(b)), 1e-9);
  }
}

TEST(PcsProperties, ArgmaxMatchesBruteForceOnRawBacklog) {
  Rng rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 5));
    const auto S = random_schedule_set(rng, n, static_cast<std::size_t>(uniform_int(rng, 2, 10)));
    const bool diagonal = trial % 4 == 0;
    const auto b = random_valid_expert(rng, S, diagonal);
    auto x = random_backlog(rng, n, trial % 3 == 0 ? 2 : 30);
    if (trial % 50 == 0) std::fill(x.begin(), x.end(), 0);
    const auto y = normalize(Backlog(x));
    const auto expected = oracle_argmax(S.configs(), as_doubles(x), as_pair_map(b));
    ASSERT_EQ(mu_index(y.values(), b, S), expected) << "trial " << trial;
  }
}

TEST(PcsProperties, ArgmaxScaleInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 5));
    const auto S = random_schedule_set(rng, n, static_cast<std::size_t>(uniform_int(rng, 2, 8)));
    const auto b = random_valid_expert(rng, S);
    const auto y = normalize(Backlog(random_backlog(rng, n)));
    const auto k = mu_index(y.values(), b, S);
    // Power-of-two scaling is exact, so the argmax must match bit for bit.
    const double c2 = std::ldexp(1.0, static_cast<int>(uniform_int(rng, -20, 20)));
    EXPECT_EQ(mu_index(y.values(), b.scaled(c2), S), k);
    // Arbitrary c: require agreement whenever the winning margin is not a rounding-level tie.
    const double c = uniform(rng, 0.01, 100.0);
    std::vector<double> scores;
    for (const auto& s : S) scores.push_back(pcs_score(s, y, b));
    double runner_up = -INFINITY;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (j != k) runner_up = std::max(runner_up, scores[j]);
    if (scores[k] - runner_up > 1e-12) {
      EXPECT_EQ(mu_index(y.values(), b.scaled(c), S), k);
    }
  }
}

TEST(PcsProperties, ArgmaxDependsOnlyOnBacklogDirection) {
  Rng rng(4);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 5));
    const auto S = random_schedule_set(rng, n, static_cast<std::size_t>(uniform_int(rng, 2, 8)));
    const auto b = random_valid_expert(rng, S);
    const auto x = random_backlog(rng, n, 20);
    Config scaled = x;
    const auto c = uniform_int(rng, 2, 50);
    for (auto& v : scaled) v *= c;
    // The brute-force form on raw backlogs is homogeneous; mu must agree at
    // both scales, and the direction is the same.
    const auto k1 = mu_index(normalize(Backlog(x)).values(), b, S);
    const auto k2 = mu_index(normalize(Backlog(scaled)).values(), b, S);
    EXPECT_EQ(k1, k2);
    EXPECT_EQ(k1, oracle_argmax(S.configs(), as_doubles(x), as_pair_map(b)));
    EXPECT_EQ(k2, oracle_argmax(S.configs(), as_doubles(scaled), as_pair_map(b)));
  }
}

TEST(PcsProperties, DeterministicAcrossRepeatedCalls) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 6));
    const auto S = random_schedule_set(rng, n, 6);
    const auto b = random_valid_expert(rng, S);
    const auto y = normalize(Backlog(random_backlog(rng, n)));
    const auto first = mu_index(y.values(), b, S);
    for (int r = 0; r < 3; ++r) EXPECT_EQ(mu_index(y.values(), b, S), first);
  }
}
