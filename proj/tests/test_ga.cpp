#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "sfga/ga.hpp"

using namespace sfga;

namespace {

Fitness neg_sq_norm() {
  return {2, [](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1]); }};
}

}  // namespace

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(3);
  double s = 0, s2 = 0, n1 = 0, n2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
    const double z = rng.normal();
    n1 += z;
    n2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - 0.25, 1.0 / 12.0, 0.002);
  EXPECT_NEAR(n1 / n, 0.0, 0.01);
  EXPECT_NEAR(n2 / n, 1.0, 0.015);
}

TEST(Tournament, FitterMemberWins) {
  Rng rng(1);
  const std::vector<double> f{1.0, 5.0};
  int wins = 0;
  for (int i = 0; i < 1000; ++i) wins += tournament_select(f, rng) == 1;
  // Index 0 wins only when drawn twice.
  EXPECT_NEAR(wins / 1000.0, 0.75, 0.05);
}

TEST(Tournament, SingleElement) {
  Rng rng(1);
  const std::vector<double> f{3.0};
  EXPECT_EQ(tournament_select(f, rng), 0u);
}

TEST(Tournament, UniformFitnessGivesUniformSelection) {
  Rng rng(9);
  const std::size_t k = 10;
  const std::vector<double> f(k, 1.0);
  std::vector<int> counts(k, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[tournament_select(f, rng)];
  const double expected = draws / static_cast<double>(k);
  const double sd = std::sqrt(draws * 0.1 * 0.9);
  for (int c : counts) EXPECT_LT(std::fabs(c - expected), 3.0 * sd);
}

TEST(Tournament, RejectsEmpty) {
  Rng rng(1);
  EXPECT_THROW(tournament_select(std::vector<double>{}, rng), std::invalid_argument);
}

TEST(BlendCrossover, IdenticalParents) {
  Rng rng(5);
  const SearchBox box = SearchBox::cube(3, -10, 10);
  const Candidate x{1.5, -2.0, 7.0};
  const auto [c1, c2] = blend_crossover(x, x, box, 0.1, rng);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_DOUBLE_EQ(c1[i], x[i]);
    EXPECT_DOUBLE_EQ(c2[i], x[i]);
  }
}

TEST(BlendCrossover, MidpointWeights) {
  const SearchBox box = SearchBox::cube(2, -1, 2);
  const std::vector<double> w{0.5, 0.5};
  const auto [c1, c2] = blend_with_weights(Candidate{0, 0}, Candidate{1, 1}, w, box);
  EXPECT_DOUBLE_EQ(c1[0], 0.5);
  EXPECT_DOUBLE_EQ(c1[1], 0.5);
  EXPECT_DOUBLE_EQ(c2[0], 0.5);
}

TEST(BlendCrossover, ZeroExtensionStaysBetweenParents) {
  Rng rng(2);
  const SearchBox box = SearchBox::cube(2, -100, 100);
  for (int i = 0; i < 1000; ++i) {
    const auto [c1, c2] = blend_crossover(Candidate{0, 0}, Candidate{1, 1}, box, 0.0, rng);
    for (double v : c1) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(BlendCrossover, ChildrenStayInBox) {
  Rng rng(11);
  const SearchBox box = SearchBox::cube(2, -60, 60);
  for (int i = 0; i < 10000; ++i) {
    const Candidate a{rng.uniform(-60, 60), rng.uniform(-60, 60)};
    const Candidate b{rng.uniform(-60, 60), rng.uniform(-60, 60)};
    const auto [c1, c2] = blend_crossover(a, b, box, 0.1, rng);
    ASSERT_TRUE(box.contains(c1));
    ASSERT_TRUE(box.contains(c2));
  }
}

TEST(BlendCrossover, RejectsDimensionMismatch) {
  Rng rng(1);
  const SearchBox box = SearchBox::cube(2, 0, 1);
  EXPECT_THROW(blend_crossover(Candidate{0, 0}, Candidate{0, 0, 0}, box, 0.1, rng), std::invalid_argument);
}

TEST(UniformMutate, ZeroProbabilityIsIdentity) {
  Rng rng(4);
  const SearchBox box = SearchBox::cube(4, -1, 1);
  const Candidate x{0.1, 0.2, -0.3, 0.4};
  EXPECT_EQ(uniform_mutate(x, box, 0.0, rng), x);
}

TEST(UniformMutate, ProbabilityOneResamplesEverything) {
  Rng rng(4);
  const SearchBox box = SearchBox::cube(4, -1, 1);
  const Candidate x{0.1, 0.2, -0.3, 0.4};
  const Candidate y = uniform_mutate(x, box, 1.0, rng);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NE(x[i], y[i]);
  EXPECT_TRUE(box.contains(y));
}

TEST(UniformMutate, EmpiricalFrequency) {
  Rng rng(8);
  const SearchBox box = SearchBox::cube(1, -1, 1);
  const Candidate x{0.25};
  int changed = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) changed += uniform_mutate(x, box, 0.025, rng)[0] != x[0];
  EXPECT_NEAR(changed / static_cast<double>(trials), 0.025, 0.005);
}

TEST(RunGa, ConvergesOnNegativeSquaredNorm) {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GaConfig cfg;
    cfg.population_size = 80;
    cfg.generations = 100;
    cfg.seed = seed;
    const GaResult r = run_ga(neg_sq_norm(), SearchBox::cube(2, -60, 60), cfg);
    EXPECT_EQ(r.history.size(), 101u);
    close += r.best_fitness >= -1e-2;
  }
  EXPECT_GE(close, 8);
}

TEST(RunGa, ZeroGenerationsReturnsBestInitialMember) {
  GaConfig cfg;
  cfg.generations = 0;
  cfg.seed = 3;
  std::vector<Candidate> seen;
  std::vector<double> values;
  Fitness f{2, [&](std::span<const double> x) {
              const double v = -(x[0] * x[0] + x[1] * x[1]);
              seen.emplace_back(x.begin(), x.end());
              values.push_back(v);
              return v;
            }};
  const GaResult r = run_ga(f, SearchBox::cube(2, -60, 60), cfg);
  ASSERT_EQ(seen.size(), cfg.population_size);
  const auto it = std::max_element(values.begin(), values.end());
  EXPECT_EQ(r.best_fitness, *it);
  EXPECT_EQ(r.best_candidate, seen[static_cast<std::size_t>(it - values.begin())]);
  EXPECT_EQ(r.history.size(), 1u);
}

TEST(RunGa, SameSeedIsBitIdentical) {
  GaConfig cfg;
  cfg.seed = 99;
  cfg.generations = 40;
  const auto box = SearchBox::cube(2, -60, 60);
  EXPECT_EQ(run_ga(neg_sq_norm(), box, cfg), run_ga(neg_sq_norm(), box, cfg));
  GaConfig other = cfg;
  other.seed = 100;
  EXPECT_NE(run_ga(neg_sq_norm(), box, cfg).history, run_ga(neg_sq_norm(), box, other).history);
}

TEST(RunGa, ThreadedEvaluationMatchesSerial) {
  GaConfig cfg;
  cfg.seed = 5;
  cfg.generations = 30;
  const auto box = SearchBox::cube(2, -60, 60);
  GaConfig threaded = cfg;
  threaded.threads = 4;
  EXPECT_EQ(run_ga(neg_sq_norm(), box, cfg), run_ga(neg_sq_norm(), box, threaded));
}

TEST(RunGa, ElitismKeepsBestNondecreasing) {
  const Fitness rastrigin_like{2, [](std::span<const double> x) {
                                 double s = 20.0;
                                 for (double v : x) s += v * v - 10.0 * std::cos(2.0 * 3.141592653589793 * v);
                                 return -s;
                               }};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GaConfig cfg;
    cfg.seed = seed;
    cfg.generations = 60;
    const GaResult r = run_ga(rastrigin_like, SearchBox::cube(2, -60, 60), cfg);
    for (std::size_t g = 1; g < r.history.size(); ++g) ASSERT_GE(r.history[g].best, r.history[g - 1].best);
    EXPECT_EQ(r.best_fitness, r.history.back().best);
  }
}

TEST(RunGa, EveryEvaluatedCandidateInBox) {
  SearchBox box;
  box.lower = {-1.0, 10.0, -5.0};
  box.upper = {1.0, 20.0, -4.0};
  std::atomic<bool> outside{false};
  Fitness f{3, [&](std::span<const double> x) {
              if (!box.contains(x)) outside = true;
              return -(x[0] + x[1] + x[2]);
            }};
  GaConfig cfg;
  cfg.seed = 12;
  cfg.mutation_prob = 0.2;
  cfg.blend_extension = 0.5;
  run_ga(f, box, cfg);
  EXPECT_FALSE(outside);
}

TEST(RunGa, NanFitnessTreatedAsWorst) {
  Fitness f{1, [](std::span<const double> x) { return x[0] < 0 ? std::nan("") : -x[0]; }};
  GaConfig cfg;
  cfg.seed = 2;
  const GaResult r = run_ga(f, SearchBox::cube(1, -1, 1), cfg);
  EXPECT_GE(r.best_candidate[0], 0.0);
  EXPECT_NEAR(r.best_fitness, 0.0, 1e-3);
}

TEST(RunGa, ThreadedFitnessErrorPropagates) {
  Fitness f{1, [](std::span<const double>) -> double { throw std::runtime_error("boom"); }};
  GaConfig cfg;
  cfg.threads = 3;
  EXPECT_THROW(run_ga(f, SearchBox::cube(1, 0, 1), cfg), std::runtime_error);
}

TEST(RunGa, RejectsArityMismatch) {
  GaConfig cfg;
  EXPECT_THROW(run_ga(neg_sq_norm(), SearchBox::cube(3, -1, 1), cfg), std::invalid_argument);
}

TEST(RunGa, RejectsInvalidConfig) {
  GaConfig cfg;
  cfg.elite_count = cfg.population_size;
  EXPECT_THROW(run_ga(neg_sq_norm(), SearchBox::cube(2, -1, 1), cfg), std::invalid_argument);
  GaConfig bad_p;
  bad_p.crossover_prob = 1.5;
  EXPECT_THROW(run_ga(neg_sq_norm(), SearchBox::cube(2, -1, 1), bad_p), std::invalid_argument);
  SearchBox inverted;
  inverted.lower = {1.0, 0.0};
  inverted.upper = {0.0, 1.0};
  EXPECT_THROW(run_ga(neg_sq_norm(), inverted, GaConfig{}), std::invalid_argument);
}
