#include "treeglc/layout_bc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "treeglc/error.hpp"

namespace treeglc {

double length(Point p) { return std::hypot(p.x, p.y); }

std::vector<Interval> attribute_ranges(const DecisionTree& t, const Dataset& d) {
  const auto binding = bind_attributes(t, d);
  std::vector<Interval> out;
  for (std::size_t a = 0; a < t.attribute_names.size(); ++a) {
    const auto& meta = d.attributes[binding[a]];
    out.push_back(meta.observed ? meta.range() : Interval{});
  }
  for (const auto& [id, n] : t.nodes) {
    if (n.is_leaf()) continue;
    auto& r = out[n.attribute];
    if (!std::isfinite(r.lo)) {
      r = Interval::closed(n.threshold, n.threshold);
    } else {
      r.lo = std::min(r.lo, n.threshold);
      r.hi = std::max(r.hi, n.threshold);
    }
  }
  return out;
}

std::vector<Interval> threshold_ranges(const DecisionTree& t) {
  std::vector<std::vector<double>> ts(t.attribute_names.size());
  for (const auto& [id, n] : t.nodes) {
    if (!n.is_leaf()) ts[n.attribute].push_back(n.threshold);
  }
  std::vector<Interval> out;
  for (const auto& v : ts) {
    if (v.empty()) {
      out.push_back(Interval::closed(0.0, 1.0));
      continue;
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double pad = *hi > *lo ? *hi - *lo : 1.0;
    out.push_back(Interval::closed(*lo - pad, *hi + pad));
  }
  return out;
}

std::optional<BcScaleMode> parse_bc_scale(std::string_view s) {
  if (s == "uniform") return BcScaleMode::uniform;
  if (s == "proportional") return BcScaleMode::proportional;
  return std::nullopt;
}

std::optional<BcStyle> parse_bc_style(std::string_view s) {
  if (s == "sharp") return BcStyle::sharp;
  if (s == "smooth") return BcStyle::smooth;
  return std::nullopt;
}

std::string_view to_string(BcScaleMode m) {
  return m == BcScaleMode::uniform ? "uniform" : "proportional";
}

std::string_view to_string(BcStyle s) { return s == BcStyle::sharp ? "sharp" : "smooth"; }

double BcOptions::effective_level_height() const {
  return level_height ? *level_height
                      : base_edge_length * std::sin(slope_angle * std::numbers::pi / 180.0);
}

void BcOptions::validate() const {
  if (!(base_edge_length > 0.0) || !std::isfinite(base_edge_length)) {
    throw Error(ErrorCode::invalid_argument, "base_edge_length must be positive");
  }
  if (!(slope_angle > 0.0 && slope_angle < 90.0)) {
    throw Error(ErrorCode::invalid_argument, "slope_angle must lie in (0, 90)");
  }
  if (level_height && (!(*level_height > 0.0) || !std::isfinite(*level_height))) {
    throw Error(ErrorCode::invalid_argument, "level_height must be positive");
  }
  for (const auto& [id, p] : drag) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::invalid_argument, "drag offsets must be finite");
    }
  }
}

std::optional<std::size_t> BcScene::edge_of(NodeId node, Side side) const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].node == node && edges[i].side == side) return i;
  }
  return std::nullopt;
}

namespace {

std::string trim_number(double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf, static_cast<std::size_t>(n));
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

Point along(const BcEdge& e, double value) {
  const double span = e.value_at_to - e.value_at_from;
  if (span == 0.0) return e.from;
  const double f = (value - e.value_at_from) / span;
  return e.from + f * (e.to - e.from);
}

}  // namespace

BcScene layout_bc(const DecisionTree& t, const std::vector<Interval>& ranges,
                  const BcOptions& opts) {
  t.validate();
  opts.validate();
  if (ranges.size() != t.attribute_names.size()) {
    throw Error(ErrorCode::invalid_argument, "one range per tree attribute is required");
  }
  for (const auto& [id, n] : t.nodes) {
    if (n.is_leaf()) continue;
    const auto& r = ranges[n.attribute];
    if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw Error(ErrorCode::invalid_argument,
                  "attribute '" + t.attribute_names[n.attribute] + "' has a zero-width range");
    }
  }

  BcScene s;
  s.tree = t;
  s.ranges = ranges;
  s.options = opts;
  s.classes = t.leaf_classes();

  const double dx = opts.base_edge_length * std::cos(opts.slope_angle * std::numbers::pi / 180.0);
  const double dy = opts.effective_level_height();

  // Apexes: geometric placement plus the drag offsets of the node and its ancestors.
  auto place = [&](auto&& self, NodeId id, Point at, Point carried) -> void {
    auto it = opts.drag.find(id);
    if (it != opts.drag.end()) carried = carried + it->second;
    s.apexes[id] = at + carried;
    const auto& n = t.node(id);
    if (n.is_leaf()) return;
    self(self, n.left, at + Point{-dx, dy}, carried);
    self(self, n.right, at + Point{dx, dy}, carried);
  };
  place(place, t.root, Point{}, Point{});

  for (NodeId id : t.preorder()) {
    const auto& n = t.node(id);
    if (n.is_leaf()) {
      s.leaves.push_back({id, n.label, n.support, n.purity, s.apexes[id]});
      s.labels.push_back({s.apexes[id] + Point{0.0, 14.0},
                          n.label + " (" + std::to_string(n.support) + ")"});
      continue;
    }
    const auto& r = ranges[n.attribute];
    const double below = n.threshold - r.lo;
    const double above = r.hi - n.threshold;
    const double longer = std::max(below, above);
    for (Side side : {Side::left, Side::right}) {
      BcEdge e;
      e.node = id;
      e.side = side;
      e.child = n.child(side);
      e.attribute = n.attribute;
      e.from = s.apexes[id];
      e.child_apex = s.apexes[e.child];
      e.value_at_from = n.threshold;
      e.value_at_to = side == Side::left ? r.lo : r.hi;
      const double fraction = opts.scale == BcScaleMode::uniform
                                  ? 1.0
                                  : (side == Side::left ? below : above) / longer;
      const Point full = e.child_apex - e.from;
      e.to = fraction == 1.0 ? e.child_apex : e.from + fraction * full;
      e.length = fraction * length(full);
      e.dotted = fraction < 1.0;
      for (int k = 0; k <= 4; ++k) {
        const double v = e.value_at_from + (e.value_at_to - e.value_at_from) * k / 4.0;
        e.ticks.push_back({v, along(e, v)});
      }
      s.edges.push_back(std::move(e));
    }
    s.labels.push_back({s.apexes[id] + Point{0.0, -8.0},
                        t.attribute_names[n.attribute] + " " + trim_number(n.threshold)});
  }
  return s;
}

Point value_to_edge_position(const BcScene& s, NodeId node, Side side, double value) {
  const auto idx = s.edge_of(node, side);
  if (!idx) throw Error(ErrorCode::not_found, "no edge for node " + std::to_string(node));
  const auto& e = s.edges[*idx];
  const bool ok = side == Side::left ? (value >= e.value_at_to && value <= e.value_at_from)
                                     : (value >= e.value_at_from && value <= e.value_at_to);
  if (!ok) throw Error(ErrorCode::out_of_range, "value outside the edge range");
  return along(e, value);
}

std::vector<Point> smooth_through(const std::vector<Point>& pts) {
  std::vector<Point> out;
  if (pts.empty()) return out;
  out.push_back(pts.front());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point p0 = i == 0 ? pts[i] : pts[i - 1];
    const Point p1 = pts[i];
    const Point p2 = pts[i + 1];
    const Point p3 = i + 2 < pts.size() ? pts[i + 2] : pts[i + 1];
    out.push_back(p1 + (1.0 / 6.0) * (p2 - p0));
    out.push_back(p2 - (1.0 / 6.0) * (p3 - p1));
    out.push_back(p2);
  }
  return out;
}

BcScene overlay_cases(BcScene s, const Dataset& d) {
  const auto binding = bind_attributes(s.tree, d);
  std::vector<std::string> classes = d.classes;
  for (const auto& c : s.classes) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  s.classes = std::move(classes);
  for (const auto& c : d.cases) {
    const auto trace = predict(s.tree, c, binding);
    BcPolyline pl;
    pl.case_id = c.id;
    pl.actual = c.label;
    pl.predicted = trace.predicted;
    for (const auto& step : trace.steps) {
      const std::size_t ei = *s.edge_of(step.node, step.branch);
      const auto& e = s.edges[ei];
      const double lo = std::min(e.value_at_from, e.value_at_to);
      const double hi = std::max(e.value_at_from, e.value_at_to);
      const double v = std::clamp(step.value, lo, hi);
      pl.clamped = pl.clamped || v != step.value;
      pl.points.push_back(along(e, v));
      pl.edge_index.push_back(ei);
    }
    if (s.options.style == BcStyle::smooth) pl.bezier = smooth_through(pl.points);
    s.polylines.push_back(std::move(pl));
  }
  return s;
}

}  // namespace treeglc
