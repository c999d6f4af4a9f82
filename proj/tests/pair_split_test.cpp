#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "treeglc/error.hpp"
#include "treeglc/induction.hpp"

using namespace treeglc;
using namespace treeglc::testing;

namespace {

std::vector<PairCase> blue_yellow() { return {{1, 1, 0}, {1, 2, 0}, {3, 3, 1}, {4, 4, 1}}; }

// Direct enumeration of the candidate grid, scoring each point with
// pair_objective_value; the search itself uses prefix sums.
PairSplitResult enumerate(const std::vector<PairCase>& cs, std::size_t k, PairObjective obj) {
  std::vector<double> xs, ys;
  for (const auto& c : cs) xs.push_back(c.x), ys.push_back(c.y);
  auto axis = [](std::vector<double> v) {
    std::vector<std::optional<double>> out;
    for (double t : candidate_thresholds(std::move(v))) out.emplace_back(t);
    if (out.empty()) out.emplace_back(std::nullopt);
    return out;
  };
  PairSplitResult best;
  bool have = false;
  for (auto tx : axis(xs)) {
    for (auto ty : axis(ys)) {
      const double v = pair_objective_value(cs, k, tx, ty, obj);
      if (!have || v > best.objective + 1e-12) best.tx = tx, best.ty = ty, best.objective = v, have = true;
    }
  }
  return best;
}

}  // namespace

TEST(PairSplit, QuadrantConvention) {
  EXPECT_EQ(quadrant_of(1, 1, 2.0, 2.0), 0u);
  EXPECT_EQ(quadrant_of(2, 1, 2.0, 2.0), 1u);
  EXPECT_EQ(quadrant_of(1, 2, 2.0, 2.0), 2u);
  EXPECT_EQ(quadrant_of(2, 2, 2.0, 2.0), 3u);
  EXPECT_EQ(quadrant_of(-5, -5, std::nullopt, std::nullopt), 3u);
}

TEST(PairSplit, SeparatedPairsUseTheStatedTieBreak) {
  const auto cs = blue_yellow();
  const auto r = pair_split_search(cs, 2);
  EXPECT_EQ(r.objective, 4.0);
  // x candidates {2, 3.5}, y candidates {1.5, 2.5, 3.5}: the smallest
  // maximizing point is (2, 1.5); (2, 2.5) scores the same.
  EXPECT_EQ(r.tx, 2.0);
  EXPECT_EQ(r.ty, 1.5);
  EXPECT_EQ(pair_objective_value(cs, 2, 2.0, 2.5, PairObjective::pure_count), 4.0);
  for (const auto& q : r.quadrants) EXPECT_LE(q.majority ? q.counts[*q.majority] : 0u, q.total);
}

TEST(PairSplit, XorSingleCandidate) {
  const std::vector<PairCase> cs{{1, 1, 0}, {3, 3, 0}, {1, 3, 1}, {3, 1, 1}};
  const auto r = pair_split_search(cs, 2);
  EXPECT_EQ(r.tx, 2.0);
  EXPECT_EQ(r.ty, 2.0);
  // one case per quadrant, so every quadrant is pure
  EXPECT_EQ(r.objective, 4.0);
  EXPECT_DOUBLE_EQ(pair_split_search(cs, 2, PairObjective::gini_quadrants).objective, 1.0);
}

TEST(PairSplit, SingleClassScoresEveryCase) {
  const std::vector<PairCase> cs{{1, 5, 0}, {2, 6, 0}, {3, 7, 0}};
  const auto r = pair_split_search(cs, 2);
  EXPECT_EQ(r.objective, 3.0);
  EXPECT_EQ(r.tx, 1.5);
  EXPECT_EQ(r.ty, 5.5);
}

TEST(PairSplit, DegenerateAxisIsFlagged) {
  const std::vector<PairCase> cs{{1, 1, 0}, {1, 2, 0}, {1, 3, 1}, {1, 4, 1}};
  const auto r = pair_split_search(cs, 2);
  EXPECT_TRUE(r.degenerate_x);
  EXPECT_FALSE(r.degenerate_y);
  EXPECT_FALSE(r.tx);
  EXPECT_EQ(r.ty, 2.5);
  EXPECT_EQ(r.objective, 4.0);
  EXPECT_EQ(r.quadrants[0].total + r.quadrants[2].total, 0u);
}

TEST(PairSplit, QuadrantsPartitionTheCases) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    std::vector<PairCase> cs;
    for (int j = 0; j < 40; ++j) cs.push_back({double(rng() % 10), double(rng() % 10), rng() % 3});
    cs[0].cls = 0, cs[1].cls = 1;
    for (auto obj : {PairObjective::pure_count, PairObjective::area_proxy, PairObjective::gini_quadrants}) {
      const auto r = pair_split_search(cs, 3, obj);
      std::size_t total = 0;
      for (const auto& q : r.quadrants) total += q.total;
      EXPECT_EQ(total, cs.size());
      const auto e = enumerate(cs, 3, obj);
      EXPECT_EQ(r.tx, e.tx);
      EXPECT_EQ(r.ty, e.ty);
      EXPECT_NEAR(r.objective, e.objective, 1e-12);
    }
  }
}

TEST(PairSplit, AreaProxyPrefersTheLargerPureRegion) {
  // One pure corner can be made large or small; the area objective picks the
  // split that leaves the bigger pure rectangle.
  std::vector<PairCase> cs{{0, 0, 0}, {10, 10, 1}, {9, 10, 1}, {10, 9, 1}, {1, 1, 0}};
  const auto r = pair_split_search(cs, 2, PairObjective::area_proxy);
  EXPECT_GT(r.objective, 0.0);
  EXPECT_NEAR(r.objective, pair_objective_value(cs, 2, r.tx, r.ty, PairObjective::area_proxy), 1e-15);
  EXPECT_LE(r.objective, 1.0 + 1e-12);
}

TEST(PairSplit, Errors) {
  EXPECT_THROW(pair_split_search(std::vector<PairCase>{{1, 1, 0}}, 2), Error);
  EXPECT_THROW(pair_split_search(std::vector<PairCase>{{1, 1, 0}, {2, 2, 5}}, 2), Error);
  EXPECT_EQ(parse_pair_objective("gini_quadrants"), PairObjective::gini_quadrants);
  EXPECT_FALSE(parse_pair_objective("area"));
}

TEST(PairSplit, IrisPetalPair) {
  const auto d = iris();
  const auto cs = pair_cases(d, *d.attribute_index("petal-length"), *d.attribute_index("petal-width"));
  EXPECT_EQ(cs.size(), 150u);
  const auto r = pair_split_search(cs, d.classes.size());
  const auto e = enumerate(cs, d.classes.size(), PairObjective::pure_count);
  EXPECT_EQ(r.tx, e.tx);
  EXPECT_EQ(r.ty, e.ty);
  EXPECT_EQ(r.objective, e.objective);
  EXPECT_GE(r.objective, 50.0);
}
