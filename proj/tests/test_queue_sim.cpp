#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace pcsemu;
using namespace pcsemu::testing;

TEST(Geometric, ZeroMeanIsAlwaysZero) {
  StreamRng rng(1, 0);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample_geometric(0.0, rng), 0);
}

TEST(Geometric, ProbabilityOfZero) {
  for (const auto& [mean, p0] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0 / 3.0}}) {
    StreamRng rng(7, 3);
    const int N = 200000;
    int zeros = 0;
    for (int k = 0; k < N; ++k) zeros += sample_geometric(mean, rng) == 0;
    const double se = std::sqrt(p0 * (1 - p0) / N);
    EXPECT_NEAR(static_cast<double>(zeros) / N, p0, 4 * se) << "mean " << mean;
  }
}

TEST(Geometric, RejectsInvalidMean) {
  StreamRng rng(1, 0);
  EXPECT_THROW(sample_geometric(-1.0, rng), ValidationError);
  EXPECT_THROW(sample_geometric(NAN, rng), ValidationError);
}

TEST(StreamRng, UniformStrictlyInsideUnitInterval) {
  StreamRng rng(0, 0);
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  StreamRng a(5, 0), b(5, 1), c(5, 0);
  EXPECT_NE(a.next_u64(), b.next_u64());
  StreamRng a2(5, 0);
  EXPECT_EQ(a2.next_u64(), c.next_u64());
}

TEST(StepDynamics, Examples) {
  auto r = step_dynamics(Config{1, 0}, Config{2, 1}, Config{0, 2});
  EXPECT_EQ(r.d, (Config{1, 0}));
  EXPECT_EQ(r.x_next, (Config{0, 2}));
  r = step_dynamics(Config{0, 0, 0}, Config{3, 1, 2}, Config{0, 0, 0});
  EXPECT_EQ(r.x_next, (Config{0, 0, 0}));
  r = step_dynamics(Config{3, 5}, Config{2, 1}, Config{1, 1});
  EXPECT_EQ(r.d, (Config{2, 1}));
  EXPECT_EQ(r.x_next, (Config{2, 5}));
}

TEST(ExpertSim, ZeroBacklogFixedPoint) {
  const ScheduleSet S({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const ExpertSpec expert{TriangularParams(3, {1.0 / 3, 0, 0, 1.0 / 3, 0, 1.0 / 3}), S};
  SimConfig cfg{expert, DeterministicArrivals{{0, 0, 0}}, 100, {0, 0, 0}, 1};
  for (const auto& r : run_expert_sim(cfg)) {
    EXPECT_EQ(r.s, S[0]);
    EXPECT_EQ(r.x.values(), (Config{0, 0, 0}));
  }
}

TEST(ExpertSim, DemoConfigIsDeterministicAndHasTheRightArrivalMean) {
  auto cfg = io::demo_config().sim;
  const auto a = run_expert_sim(cfg);
  const auto b = run_expert_sim(cfg);
  ASSERT_EQ(a.size(), 1000000u);
  EXPECT_TRUE(a == b);
  double sum = 0.0;
  for (const auto& r : a) sum += static_cast<double>(r.a[1]);
  const double se = std::sqrt(6.0 / 1e6);
  EXPECT_NEAR(sum / 1e6, 2.0, 3 * se);
  cfg.seed += 1;
  const auto c = run_expert_sim(cfg);
  EXPECT_FALSE(a == c);
}

TEST(ExpertSim, ConservationAndNonnegativity) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 6));
    const auto S = random_schedule_set(rng, n, static_cast<std::size_t>(uniform_int(rng, 2, 10)));
    const ExpertSpec expert{random_valid_expert(rng, S), S};
    ArrivalModel arrivals;
    if (trial % 2) {
      std::vector<double> means(n);
      for (auto& m : means) m = uniform(rng, 0.0, 2.0);
      arrivals = GeometricArrivals{means};
    } else {
      arrivals = AdversarialArrivals{uniform_int(rng, 1, 4), uniform_int(rng, 1, 3)};
    }
    SimConfig cfg{expert, arrivals, 2000, random_backlog(rng, n, 5), rng()};
    const auto trace = run_expert_sim(cfg);
    Config total = cfg.x0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const auto& r = trace[k];
      ASSERT_EQ(r.x.values(), total);
      ASSERT_EQ(r.s, mu(normalize(r.x), expert.params, S));
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_GE(r.d[i], 0);
        ASSERT_LE(r.d[i], std::min(r.s[i], r.x[i]));
        total[i] += r.a[i] - r.d[i];
        ASSERT_GE(total[i], 0);
      }
    }
  }
}

TEST(ExpertSim, AdversarialBurstRotatesAcrossQueues) {
  const ScheduleSet S({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  ArrivalProcess p(AdversarialArrivals{3, 1}, 3, 9, 0);
  for (std::int64_t t = 0; t < 9; ++t) {
    const auto a = p.next(t);
    Config expected(3, 0);
    expected[static_cast<std::size_t>(t / 3)] = 3;
    EXPECT_EQ(a, expected) << "slot " << t;
  }
}

TEST(ExpertSim, ValidationFailsFast) {
  auto cfg = io::demo_config().sim;
  cfg.x0 = {0, 0, 0};
  EXPECT_THROW(ExpertSimulator{cfg}, ValidationError);
  cfg = io::demo_config().sim;
  cfg.expert.params = TriangularParams(2, {0.1, 0.8, 0.1});
  EXPECT_THROW(ExpertSimulator{cfg}, ValidationError);
  cfg = io::demo_config().sim;
  cfg.arrivals = GeometricArrivals{{1.0}};
  EXPECT_THROW(ExpertSimulator{cfg}, ValidationError);
}

TEST(Replay, RejectsDecisionOutsideScheduleWithLineNumber) {
  std::vector<ObservedRecord> recs(2);
  recs[0] = {2, 0, Config{1, 1}, std::nullopt, Config{2, 1}, std::nullopt, std::nullopt};
  recs[1] = {3, 1, Config{1, 1}, std::nullopt, Config{1, 1}, std::nullopt, std::nullopt};
  try {
    replay_trace(recs, demo_S());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Replay, IrregularTimestampsAreOpaque) {
  std::vector<ObservedRecord> recs;
  const std::vector<std::int64_t> stamps{1, 2, 10, 11};
  for (std::size_t k = 0; k < stamps.size(); ++k)
    recs.push_back({k + 2, stamps[k], Config{static_cast<std::int64_t>(k), 1}, std::nullopt, demo_S()[k],
                    std::nullopt, std::nullopt});
  const auto obs = replay_trace(recs, demo_S());
  ASSERT_EQ(obs.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(obs[k].s, demo_S()[k]);
  EXPECT_EQ(obs[3].y.values()[0], 0.75);
}

TEST(Replay, AcceptsNormalizedBacklog) {
  std::vector<ObservedRecord> recs{{2, 0, std::nullopt, std::vector<double>{0.25, 0.75}, Config{2, 1}, {}, {}}};
  const auto obs = replay_trace(recs, demo_S());
  EXPECT_EQ(obs[0].y.values()[1], 0.75);
  recs[0].y = std::vector<double>{0.5, 0.6};
  EXPECT_THROW(replay_trace(recs, demo_S()), ValidationError);
}
