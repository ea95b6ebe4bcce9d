#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dirsign/assignment.hpp"
#include "dirsign/wasserstein.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using dirsign::CostMatrix;
using dirsign::Errc;
using dirsign::InfiniteDeathPolicy;
using dirsign::PersistenceDiagram;
using dirsign::PersistencePair;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

PersistenceDiagram diagram(std::vector<PersistencePair> pts) { return {std::move(pts), std::nullopt}; }

std::vector<PersistencePair> random_points(std::mt19937_64& rng, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> count(0, max_points);
  std::uniform_real_distribution<double> birth(-2.0, 2.0), life(0.0, 3.0);
  std::vector<PersistencePair> out(count(rng));
  for (auto& p : out) {
    p.birth = birth(rng);
    p.death = p.birth + life(rng);
  }
  return out;
}

}  // namespace

TEST(Assignment, Examples) {
  auto a = dirsign::min_cost_assignment(CostMatrix{{0, 9}, {9, 0}});
  EXPECT_EQ(a.total_cost, 0.0);
  EXPECT_EQ(a.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}}));

  auto b = dirsign::min_cost_assignment(CostMatrix{{7}});
  EXPECT_EQ(b.total_cost, 7.0);
  EXPECT_EQ(b.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));

  auto c = dirsign::min_cost_assignment(CostMatrix{{1, 2}, {3, 1}});
  EXPECT_EQ(c.total_cost, 2.0);
  EXPECT_EQ(c.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}}));

  EXPECT_TRUE(dirsign::min_cost_assignment(CostMatrix(0, 0)).pairs.empty());
}

TEST(Assignment, Errors) {
  EXPECT_ERRC(dirsign::min_cost_assignment(CostMatrix(2, 3)), Errc::shape);
  EXPECT_ERRC(dirsign::min_cost_assignment(CostMatrix{{1, -1}, {0, 0}}), Errc::domain);
  EXPECT_ERRC(dirsign::min_cost_assignment(CostMatrix{{1, inf}, {0, 0}}), Errc::domain);
  EXPECT_ERRC((CostMatrix{{1, 2}, {3}}), Errc::shape);
}

TEST(AssignmentProperty, MatchesBruteForceUpToSix) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> real(0.0, 10.0);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t n = 1 + trial % 6;
    CostMatrix c(n, n);
    bool ties = trial % 2;  // small integers exercise degenerate optima
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = ties ? small(rng) : real(rng);
    auto m = dirsign::min_cost_assignment(c);
    EXPECT_NEAR(m.total_cost, oracle::brute_force_assignment(c), 1e-9);
    ASSERT_EQ(m.pairs.size(), n);
    std::set<std::size_t> cols;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(m.pairs[i].first, i);
      cols.insert(m.pairs[i].second);
      sum += c(i, m.pairs[i].second);
    }
    EXPECT_EQ(cols.size(), n);
    EXPECT_EQ(sum, m.total_cost);
  }
}

TEST(Wasserstein, IdenticalDiagramsAreAtZero) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = diagram(random_points(rng, 6));
    EXPECT_NEAR(dirsign::wasserstein_distance(d, d, 2.0), 0.0, 1e-12);
  }
}

TEST(Wasserstein, SinglePointAgainstEmpty) {
  EXPECT_NEAR(dirsign::wasserstein_distance(diagram({{0, 2}}), diagram({}), 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(dirsign::wasserstein_distance(diagram({}), diagram({{0, 2}}), 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(dirsign::wasserstein_distance(diagram({}), diagram({}), 2.0), 0.0);
}

TEST(Wasserstein, DirectMatchBeatsDiagonal) {
  EXPECT_NEAR(dirsign::wasserstein_distance(diagram({{0, 2}}), diagram({{0, 4}}), 2.0), 2.0, 1e-15);
}

TEST(Wasserstein, OrderValidation) {
  auto d = diagram({{0, 1}});
  EXPECT_ERRC(dirsign::wasserstein_distance(d, d, 0.5), Errc::order);
  EXPECT_ERRC(dirsign::wasserstein_distance(d, d, std::nan("")), Errc::order);
  EXPECT_ERRC(dirsign::wasserstein_distance(d, d, inf), Errc::order);
}

TEST(Wasserstein, InfiniteDeathPolicies) {
  PersistenceDiagram a{{{0, 1}, {-1, inf}}, 5.0};
  PersistenceDiagram b{{{-1, inf}}, 3.0};
  EXPECT_ERRC(dirsign::wasserstein_distance(a, b, 2.0, InfiniteDeathPolicy::reject), Errc::infinite_death);
  // drop: only (0,1) remains, matched to the diagonal.
  EXPECT_NEAR(dirsign::wasserstein_distance(a, b, 2.0, InfiniteDeathPolicy::drop), std::sqrt(0.5), 1e-15);
  // cap: (-1,5) vs (-1,3) directly (cost 4) plus (0,1) to the diagonal (0.5).
  EXPECT_NEAR(dirsign::wasserstein_distance(a, b, 2.0, InfiniteDeathPolicy::cap_at_global_max), std::sqrt(4.5),
              1e-15);
}

TEST(Wasserstein, CapFallsBackToLargestCoordinate) {
  auto a = diagram({{0, 4}, {-1, inf}});
  auto resolved = dirsign::resolve_infinite(a, InfiniteDeathPolicy::cap_at_global_max);
  EXPECT_EQ(resolved, (std::vector<PersistencePair>{{0, 4}, {-1, 4}}));
  auto lone = dirsign::resolve_infinite(diagram({{2, inf}}), InfiniteDeathPolicy::cap_at_global_max);
  EXPECT_EQ(lone, (std::vector<PersistencePair>{{2, 2}}));
}

TEST(WassersteinProperty, MatchesBruteForce) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_points(rng, 4), b = random_points(rng, 4);
    for (double p : {1.0, 2.0, 3.5}) {
      double got = dirsign::wasserstein_distance(diagram(a), diagram(b), p);
      EXPECT_NEAR(got, oracle::brute_force_wasserstein(a, b, p), 1e-9) << "trial " << trial << " p " << p;
    }
  }
}

TEST(WassersteinProperty, MetricAxioms) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = diagram(random_points(rng, 5)), b = diagram(random_points(rng, 5)), c = diagram(random_points(rng, 5));
    for (double p : {1.0, 2.0}) {
      double ab = dirsign::wasserstein_distance(a, b, p), ba = dirsign::wasserstein_distance(b, a, p);
      double bc = dirsign::wasserstein_distance(b, c, p), ac = dirsign::wasserstein_distance(a, c, p);
      EXPECT_NEAR(ab, ba, 1e-9);
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ac, ab + bc + 1e-9);
      EXPECT_NEAR(dirsign::wasserstein_distance(a, a, p), 0.0, 1e-9);
    }
  }
}

TEST(WassersteinProperty, LargeAgainstSmallDiagram) {
  std::mt19937_64 rng(35);
  auto big = random_points(rng, 0);
  std::uniform_real_distribution<double> birth(-2.0, 2.0), life(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    double b = birth(rng);
    big.push_back({b, b + life(rng)});
  }
  // With nothing on the other side every point goes to the diagonal.
  double expect = 0.0;
  for (const auto& p : big) expect += std::pow(oracle::diag_dist(p), 2.0);
  EXPECT_NEAR(dirsign::wasserstein_distance(diagram(big), diagram({}), 2.0), std::sqrt(expect), 1e-9);
  auto few = std::vector<PersistencePair>(big.begin(), big.begin() + 3);
  EXPECT_GE(dirsign::wasserstein_distance(diagram(big), diagram(few), 2.0), 0.0);
}
