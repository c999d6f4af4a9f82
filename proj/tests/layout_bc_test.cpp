#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"
#include "treeglc/error.hpp"
#include "treeglc/geometry.hpp"
#include "treeglc/layout_bc.hpp"

using namespace treeglc;
using namespace treeglc::testing;

namespace {

DecisionTree stump(double t) {
  DecisionTree tr;
  tr.attribute_names = {"x"};
  tr.nodes[0] = TreeNode::make_split(0, 0, t, 1, 2);
  tr.nodes[1] = TreeNode::make_leaf(1, "a", 0, 100.0);
  tr.nodes[2] = TreeNode::make_leaf(2, "b", 0, 100.0);
  return tr;
}

BcOptions proportional() {
  BcOptions o;
  o.scale = BcScaleMode::proportional;
  return o;
}

double dist(Point a, Point b) { return length(a - b); }

// Distance from p to segment ab.
double off_segment(Point p, Point a, Point b) {
  const Point ab = b - a, ap = p - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  const double t = std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

}  // namespace

TEST(LayoutBc, UniformGeometry) {
  const auto s = layout_bc(stump(2.5), {Interval::closed(1, 10)});
  const double c = 100.0 * std::cos(std::numbers::pi / 4), h = 100.0 * std::sin(std::numbers::pi / 4);
  EXPECT_EQ(s.apexes.at(0), (Point{0, 0}));
  EXPECT_NEAR(s.apexes.at(1).x, -c, 1e-12);
  EXPECT_NEAR(s.apexes.at(1).y, h, 1e-12);
  EXPECT_NEAR(s.apexes.at(2).x, c, 1e-12);
  for (const auto& e : s.edges) {
    EXPECT_NEAR(e.length, 100.0, 1e-12);
    EXPECT_FALSE(e.dotted);
    EXPECT_EQ(e.to, e.child_apex);
    EXPECT_EQ(e.from, s.apexes.at(0));
    EXPECT_EQ(e.ticks.size(), 5u);
  }
}

TEST(LayoutBc, ProportionalRatioIsExact) {
  const auto s = layout_bc(stump(2.5), {Interval::closed(1, 10)}, proportional());
  const auto& l = s.edges[*s.edge_of(0, Side::left)];
  const auto& r = s.edges[*s.edge_of(0, Side::right)];
  EXPECT_DOUBLE_EQ(l.length / r.length, 1.5 / 7.5);
  EXPECT_DOUBLE_EQ(r.length, 100.0);
  EXPECT_TRUE(l.dotted);
  EXPECT_FALSE(r.dotted);
  // the dotted extension completes the short side to the child apex
  EXPECT_NEAR(dist(l.from, l.to) + dist(l.to, l.child_apex), 100.0, 1e-9);
}

TEST(LayoutBc, ProportionalRatioHoldsForRandomThresholds) {
  TreeGen gen(3);
  for (int i = 0; i < 200; ++i) {
    const double lo = gen.uniform(-100, 100), hi = lo + gen.uniform(0.1, 50);
    const double t = gen.uniform(lo, hi);
    if (t == lo) continue;
    const auto s = layout_bc(stump(t), {Interval::closed(lo, hi)}, proportional());
    const double l = s.edges[*s.edge_of(0, Side::left)].length;
    const double r = s.edges[*s.edge_of(0, Side::right)].length;
    EXPECT_NEAR(l / r, (t - lo) / (hi - t), 1e-12 * (t - lo) / (hi - t));
  }
}

TEST(LayoutBc, MidpointThresholdMatchesUniform) {
  const auto u = layout_bc(stump(5.5), {Interval::closed(1, 10)});
  const auto p = layout_bc(stump(5.5), {Interval::closed(1, 10)}, proportional());
  ASSERT_EQ(u.edges.size(), p.edges.size());
  for (std::size_t i = 0; i < u.edges.size(); ++i) {
    EXPECT_EQ(u.edges[i].to, p.edges[i].to);
    EXPECT_EQ(u.edges[i].length, p.edges[i].length);
  }
}

TEST(LayoutBc, SmallTreeCounts) {
  const auto t = published_tree("wbc_small");
  const auto s = layout_bc(t, attribute_ranges(t, wbc()));
  EXPECT_EQ(s.edges.size(), 12u);
  EXPECT_EQ(s.leaves.size(), 7u);
  std::size_t internal_apexes = 0;
  for (const auto& [id, p] : s.apexes) internal_apexes += !t.node(id).is_leaf();
  EXPECT_EQ(internal_apexes, 6u);
}

TEST(LayoutBc, ValueToEdgePosition) {
  const auto s = layout_bc(stump(2.5), {Interval::closed(1, 10)}, proportional());
  const auto& r = s.edges[*s.edge_of(0, Side::right)];
  EXPECT_EQ(value_to_edge_position(s, 0, Side::left, 2.5), s.apexes.at(0));
  EXPECT_EQ(value_to_edge_position(s, 0, Side::right, 2.5), s.apexes.at(0));
  EXPECT_EQ(value_to_edge_position(s, 0, Side::right, 10), r.to);
  const Point half = value_to_edge_position(s, 0, Side::right, 6.25);
  EXPECT_NEAR(dist(r.from, half) / dist(r.from, r.to), 0.5, 1e-12);
  try {
    value_to_edge_position(s, 0, Side::right, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
  }
  EXPECT_THROW(value_to_edge_position(s, 7, Side::left, 2.0), Error);
}

TEST(LayoutBc, PositionIsMonotoneAlongEdges) {
  const auto s = layout_bc(stump(4.0), {Interval::closed(0, 10)}, proportional());
  for (Side side : {Side::left, Side::right}) {
    double previous = -1.0;
    for (int k = 0; k <= 40; ++k) {
      const double v = side == Side::left ? 4.0 - 0.1 * k : 4.0 + 0.15 * k;
      const double d = dist(s.apexes.at(0), value_to_edge_position(s, 0, side, v));
      EXPECT_GT(d, previous);
      previous = d;
    }
  }
}

TEST(LayoutBc, SingleCaseEndsOnTheMalignantEdge) {
  const auto t = published_tree("wbc_small");
  const auto d = wbc();
  auto s = layout_bc(t, attribute_ranges(t, d));
  std::istringstream in("ucellsize,bchromatin,clump,bnuclei,mgadhesion,class\n5,8,3,4,6,malignant\n");
  const auto one = parse_csv(in, "one");
  s = overlay_cases(s, one);
  ASSERT_EQ(s.polylines.size(), 1u);
  const auto& pl = s.polylines[0];
  EXPECT_EQ(pl.predicted, "malignant");
  ASSERT_EQ(pl.points.size(), 5u);
  const auto& last = s.edges[pl.edge_index.back()];
  EXPECT_EQ(t.attribute_names[last.attribute], "mgadhesion");
  EXPECT_EQ(last.side, Side::right);
  EXPECT_EQ(t.node(last.child).label, "malignant");
  EXPECT_EQ(pl.points.back(), value_to_edge_position(s, last.node, Side::right, 6.0));
}

TEST(LayoutBc, PolylinesFollowTracesOnEveryEdge) {
  for (const auto& pc : published_cases()) {
    const auto t = published_tree(pc.name);
    const auto d = pc.data();
    for (auto opts : {BcOptions{}, proportional()}) {
      const auto s = overlay_cases(layout_bc(t, attribute_ranges(t, d), opts), d);
      ASSERT_EQ(s.polylines.size(), d.cases.size());
      for (std::size_t i = 0; i < d.cases.size(); ++i) {
        const auto trace = predict(t, d, d.cases[i]);
        const auto& pl = s.polylines[i];
        ASSERT_EQ(pl.points.size(), trace.steps.size());
        EXPECT_EQ(pl.predicted, trace.predicted);
        EXPECT_FALSE(pl.clamped);
        for (std::size_t k = 0; k < trace.steps.size(); ++k) {
          const auto& e = s.edges[pl.edge_index[k]];
          EXPECT_EQ(e.node, trace.steps[k].node);
          EXPECT_EQ(e.side, trace.steps[k].branch);
          EXPECT_LT(off_segment(pl.points[k], e.from, e.to), 1e-9);
          if (trace.steps[k].margin == 0.0) EXPECT_EQ(pl.points[k], e.from);
        }
      }
    }
  }
}

TEST(LayoutBc, OutOfRangeValuesAreClampedAndFlagged) {
  const auto s0 = layout_bc(stump(2.5), {Interval::closed(1, 10)});
  std::istringstream in("x,class\n50,b\n-3,a\n");
  const auto s = overlay_cases(s0, parse_csv(in, "wide"));
  EXPECT_TRUE(s.polylines[0].clamped);
  EXPECT_EQ(s.polylines[0].points[0], s.edges[*s.edge_of(0, Side::right)].to);
  EXPECT_TRUE(s.polylines[1].clamped);
}

TEST(LayoutBc, EmptyAndDuplicateCases) {
  const auto t = published_tree("iris");
  const auto base = layout_bc(t, attribute_ranges(t, iris()));
  std::istringstream in("sepal-length,sepal-width,petal-length,petal-width,class\n");
  const auto none = overlay_cases(base, parse_csv(in, "empty"));
  EXPECT_TRUE(none.polylines.empty());
  EXPECT_EQ(none.edges.size(), base.edges.size());

  auto twice = iris();
  twice.cases = {twice.cases[70], twice.cases[70]};
  const auto s = overlay_cases(base, twice);
  EXPECT_EQ(s.polylines[0].points, s.polylines[1].points);
}

TEST(LayoutBc, SmoothStyleInterpolatesTheSamePoints) {
  const auto t = published_tree("wbc_small");
  const auto d = wbc();
  BcOptions smooth;
  smooth.style = BcStyle::smooth;
  const auto a = overlay_cases(layout_bc(t, attribute_ranges(t, d)), d);
  const auto b = overlay_cases(layout_bc(t, attribute_ranges(t, d), smooth), d);
  for (std::size_t i = 0; i < a.polylines.size(); ++i) {
    const auto& pa = a.polylines[i];
    const auto& pb = b.polylines[i];
    EXPECT_EQ(pa.points, pb.points);
    EXPECT_TRUE(pa.bezier.empty());
    ASSERT_EQ(pb.bezier.size(), 3 * (pb.points.size() - 1) + 1);
    for (std::size_t k = 0; k < pb.points.size(); ++k) EXPECT_EQ(pb.bezier[3 * k], pb.points[k]);
  }
}

TEST(LayoutBc, DragMovesTheSubtree) {
  const auto t = published_tree("wbc_small");
  const auto ranges = attribute_ranges(t, wbc());
  BcOptions opts;
  const NodeId right = t.node(t.root).right;
  opts.drag[right] = {30, -5};
  const auto base = layout_bc(t, ranges);
  const auto moved = layout_bc(t, ranges, opts);
  const auto parents = t.parents();
  for (const auto& [id, p] : base.apexes) {
    bool below = false;
    for (NodeId at = id;; at = parents.at(at)) {
      if (at == right) below = true;
      if (at == t.root) break;
    }
    const Point want = below ? p + Point{30, -5} : p;
    EXPECT_EQ(moved.apexes.at(id), want) << id;
  }
}

TEST(LayoutBc, Deterministic) {
  const auto t = published_tree("wine");
  const auto d = wine();
  const auto a = overlay_cases(layout_bc(t, attribute_ranges(t, d), proportional()), d);
  const auto b = overlay_cases(layout_bc(t, attribute_ranges(t, d), proportional()), d);
  for (std::size_t i = 0; i < a.polylines.size(); ++i) EXPECT_EQ(a.polylines[i].points, b.polylines[i].points);
}

TEST(LayoutBc, Errors) {
  EXPECT_THROW(layout_bc(stump(2), {Interval::closed(2, 2)}), Error);
  BcOptions bad;
  bad.slope_angle = 90;
  EXPECT_THROW(layout_bc(stump(2), {Interval::closed(0, 4)}, bad), Error);
  bad = {};
  bad.base_edge_length = 0;
  EXPECT_THROW(layout_bc(stump(2), {Interval::closed(0, 4)}, bad), Error);
  bad = {};
  bad.level_height = -1;
  EXPECT_THROW(layout_bc(stump(2), {Interval::closed(0, 4)}, bad), Error);
  EXPECT_THROW(layout_bc(stump(2), {}), Error);
}

TEST(Geometry, AttributeRangesIncludeThresholds) {
  auto t = stump(20);
  std::istringstream in("x,class\n1,a\n5,b\n");
  const auto r = attribute_ranges(t, parse_csv(in, "r"));
  EXPECT_EQ(r[0], Interval::closed(1, 20));
  const auto fallback = threshold_ranges(t);
  EXPECT_LT(fallback[0].lo, 20.0);
  EXPECT_GT(fallback[0].hi, 20.0);
}
