#include "treeglc/layout_spc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "treeglc/error.hpp"

namespace treeglc {

std::optional<CondenseMode> parse_condense_mode(std::string_view s) {
  if (s == "per_zone_center" || s == "zone") return CondenseMode::per_zone_center;
  if (s == "per_zone_per_class" || s == "class") return CondenseMode::per_zone_per_class;
  return std::nullopt;
}

std::string_view to_string(CondenseMode m) {
  return m == CondenseMode::per_zone_center ? "per_zone_center" : "per_zone_per_class";
}

void SpcOptions::validate() const {
  if (!(plot_size > 0.0) || !std::isfinite(plot_size)) {
    throw Error(ErrorCode::invalid_argument, "plot_size must be positive");
  }
  if (!std::isfinite(gap) || !std::isfinite(stair_drop)) {
    throw Error(ErrorCode::invalid_argument, "gap and stair_drop must be finite");
  }
}

Point SpcPlot::to_scene(double vx, double vy) const {
  double u = (vx - x.lo) / (x.hi - x.lo);
  double v = (vy - y.lo) / (y.hi - y.lo);
  if (x.flip) u = 1.0 - u;
  if (y.flip) v = 1.0 - v;
  if (swap) std::swap(u, v);
  return {offset.x + u * size, offset.y + (1.0 - v) * size};
}

const SpcPlot& SpcScene::plot(PlotId id) const {
  if (id >= plots.size()) throw Error(ErrorCode::not_found, "unknown plot " + std::to_string(id));
  return plots[id];
}

SpcPlot& SpcScene::plot(PlotId id) {
  if (id >= plots.size()) throw Error(ErrorCode::not_found, "unknown plot " + std::to_string(id));
  return plots[id];
}

std::size_t SpcScene::zone_count() const {
  std::size_t n = 0;
  for (const auto& p : plots) n += p.zones.size();
  return n;
}

std::size_t SpcScene::forward_zone_count() const {
  std::size_t n = 0;
  for (const auto& p : plots) {
    for (const auto& z : p.zones) n += z.action.kind == ZoneAction::Kind::forward ? 1 : 0;
  }
  return n;
}

namespace {

struct PlotPlan {
  SpcPlot::Kind kind;
  NodeId x_node;
  NodeId y_node;
};

SpcAxis axis_for(const DecisionTree& t, NodeId node, const std::vector<Interval>& ranges) {
  const auto& n = t.node(node);
  const auto& r = ranges.at(n.attribute);
  if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw Error(ErrorCode::invalid_argument,
                "attribute '" + t.attribute_names[n.attribute] + "' has a zero-width range");
  }
  return {n.attribute, r.lo, r.hi, false};
}

Side side_of(double v, double threshold) { return v < threshold ? Side::left : Side::right; }

}  // namespace

SpcScene build_spc(const DecisionTree& t, const std::vector<Interval>& ranges,
                   const SpcOptions& opts) {
  t.validate();
  opts.validate();
  if (ranges.size() != t.attribute_names.size()) {
    throw Error(ErrorCode::invalid_argument, "one range per tree attribute is required");
  }
  SpcScene s;
  s.tree = t;
  s.ranges = ranges;
  s.options = opts;
  s.classes = t.leaf_classes();
  if (t.node(t.root).is_leaf()) return s;

  // Pass 1: plan plots level by level and remember who owns which plot.
  std::vector<PlotPlan> plan;
  std::map<NodeId, PlotId> primary;  // even-depth node -> its plot
  std::map<NodeId, PlotId> sibling;  // even-depth node -> sibling plot
  std::deque<NodeId> queue{t.root};
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    const auto& n = t.node(u);
    std::vector<NodeId> inner;
    for (NodeId c : {n.left, n.right}) {
      if (!t.node(c).is_leaf()) inner.push_back(c);
    }
    if (inner.empty()) {
      primary[u] = plan.size();
      plan.push_back({SpcPlot::Kind::degenerate, u, u});
      continue;
    }
    primary[u] = plan.size();
    plan.push_back({SpcPlot::Kind::primary, u, inner[0]});
    if (inner.size() == 2) {
      sibling[u] = plan.size();
      plan.push_back({SpcPlot::Kind::sibling, u, inner[1]});
    }
    for (NodeId v : inner) {
      const auto& vn = t.node(v);
      for (NodeId g : {vn.left, vn.right}) {
        if (!t.node(g).is_leaf()) queue.push_back(g);
      }
    }
  }

  auto action_for = [&](NodeId child) {
    ZoneAction a;
    const auto& c = t.node(child);
    if (c.is_leaf()) {
      a.kind = ZoneAction::Kind::terminal;
      a.label = c.label;
      a.leaf = child;
    } else {
      a.kind = ZoneAction::Kind::forward;
      a.destination = primary.at(child);
    }
    return a;
  };

  // Pass 2: zones.
  for (PlotId id = 0; id < plan.size(); ++id) {
    const auto& pp = plan[id];
    SpcPlot p;
    p.id = id;
    p.kind = pp.kind;
    p.x_node = pp.x_node;
    p.y_node = pp.y_node;
    p.x = axis_for(t, pp.x_node, ranges);
    p.y = axis_for(t, pp.y_node, ranges);
    p.size = opts.plot_size;
    p.offset = {static_cast<double>(id) * (opts.plot_size + opts.gap),
                static_cast<double>(id) * opts.stair_drop};

    const auto& u = t.node(pp.x_node);
    auto x_half = [&](Side side) {
      return side == Side::left ? std::pair{p.x.lo, u.threshold} : std::pair{u.threshold, p.x.hi};
    };
    if (pp.kind == SpcPlot::Kind::degenerate) {
      for (Side side : {Side::left, Side::right}) {
        const auto [x0, x1] = x_half(side);
        p.zones.push_back({{x0, x1, p.y.lo, p.y.hi}, action_for(u.child(side)), side, {}, 0, {}});
      }
    } else {
      const auto& v = t.node(pp.y_node);
      const Side v_side = u.left == pp.y_node ? Side::left : Side::right;
      for (Side side : {Side::left, Side::right}) {
        const auto [x0, x1] = x_half(side);
        if (side == v_side) {
          p.zones.push_back(
              {{x0, x1, p.y.lo, v.threshold}, action_for(v.left), side, Side::left, 0, {}});
          p.zones.push_back(
              {{x0, x1, v.threshold, p.y.hi}, action_for(v.right), side, Side::right, 0, {}});
          continue;
        }
        ZoneAction other;
        const NodeId o = u.child(side);
        if (t.node(o).is_leaf()) {
          other = action_for(o);
        } else {
          other.kind = ZoneAction::Kind::forward;
          other.destination =
              pp.kind == SpcPlot::Kind::primary ? sibling.at(pp.x_node) : primary.at(pp.x_node);
        }
        p.zones.push_back({{x0, x1, p.y.lo, p.y.hi}, other, side, {}, 0, {}});
      }
    }
    s.plots.push_back(std::move(p));
  }

  std::set<PlotId> destinations;
  for (const auto& p : s.plots) {
    for (const auto& z : p.zones) {
      if (z.action.kind == ZoneAction::Kind::forward) destinations.insert(z.action.destination);
    }
  }
  for (auto& p : s.plots) {
    for (auto& z : p.zones) {
      if (z.action.kind == ZoneAction::Kind::forward) {
        z.action.shade = static_cast<std::size_t>(
            std::distance(destinations.begin(), destinations.find(z.action.destination)));
      }
    }
  }
  refresh_geometry(s);
  return s;
}

SpcVisit spc_visit(const SpcScene& s, std::span<const double> tree_values) {
  SpcVisit out;
  if (s.plots.empty()) {
    const auto& root = s.tree.node(s.tree.root);
    out.label = root.label;
    out.leaf = root.id;
    return out;
  }
  PlotId at = 0;
  for (std::size_t hops = 0; hops <= s.plots.size(); ++hops) {
    const auto& p = s.plots[at];
    const double vx = tree_values[p.x.attribute];
    const double vy = tree_values[p.y.attribute];
    if (std::isnan(vx) || std::isnan(vy)) {
      throw Error(ErrorCode::invalid_argument, "missing value in a case routed through the scene");
    }
    const Side sx = side_of(vx, s.tree.node(p.x_node).threshold);
    const Side sy = side_of(vy, s.tree.node(p.y_node).threshold);
    std::optional<std::size_t> hit;
    for (std::size_t z = 0; z < p.zones.size() && !hit; ++z) {
      const auto& zone = p.zones[z];
      if ((!zone.x_side || *zone.x_side == sx) && (!zone.y_side || *zone.y_side == sy)) hit = z;
    }
    if (!hit) throw Error(ErrorCode::invalid_argument, "zones do not cover a case");
    out.plots.push_back(at);
    out.zones.push_back(*hit);
    out.values.push_back({vx, vy});
    const auto& action = p.zones[*hit].action;
    if (action.kind == ZoneAction::Kind::terminal) {
      out.label = action.label;
      out.leaf = action.leaf;
      return out;
    }
    at = action.destination;
  }
  throw Error(ErrorCode::invalid_argument, "forwarding cycle in scene");
}

void refresh_geometry(SpcScene& s) {
  s.arrows.clear();
  for (const auto& p : s.plots) {
    for (std::size_t z = 0; z < p.zones.size(); ++z) {
      const auto& zone = p.zones[z];
      if (zone.action.kind != ZoneAction::Kind::forward) continue;
      const auto c = zone.rect.center();
      const auto& dest = s.plots[zone.action.destination];
      s.arrows.push_back({p.id, z, dest.id, zone.action.shade, p.to_scene(c.x, c.y),
                          dest.offset + Point{0.0, dest.size / 2.0}});
    }
  }

  for (auto& g : s.digraphs) {
    g.points.clear();
    for (std::size_t i = 0; i < g.plots.size(); ++i) {
      const auto& p = s.plots[g.plots[i]];
      const double vx = std::clamp(g.values[i].x, p.x.lo, p.x.hi);
      const double vy = std::clamp(g.values[i].y, p.y.lo, p.y.hi);
      g.points.push_back(p.to_scene(vx, vy));
    }
    g.display = g.points;
    g.weights.assign(g.points.size(), 1);
    g.condensed.assign(g.points.size(), false);
  }

  s.representatives.clear();
  if (!s.condensed) return;
  const bool by_class = *s.condensed == CondenseMode::per_zone_per_class;
  using Key = std::tuple<PlotId, std::size_t, std::string>;
  std::map<Key, std::vector<std::pair<std::size_t, std::size_t>>> groups;
  for (std::size_t gi = 0; gi < s.digraphs.size(); ++gi) {
    const auto& g = s.digraphs[gi];
    if (g.misclassified) continue;
    for (std::size_t i = 0; i < g.plots.size(); ++i) {
      const auto& zone = s.plots[g.plots[i]].zones[g.zones[i]];
      if (zone.action.kind != ZoneAction::Kind::forward) continue;
      groups[{g.plots[i], g.zones[i], by_class ? g.actual : std::string()}].push_back({gi, i});
    }
  }
  for (const auto& [key, members] : groups) {
    const auto& [pid, zi, cls] = key;
    const auto& p = s.plots[pid];
    const auto c = p.zones[zi].rect.center();
    Point at = p.to_scene(c.x, c.y);
    if (by_class) {
      const auto it = std::find(s.classes.begin(), s.classes.end(), cls);
      const double rank = static_cast<double>(std::distance(s.classes.begin(), it));
      at.y += (rank - (static_cast<double>(s.classes.size()) - 1.0) / 2.0) * 8.0;
    }
    s.representatives.push_back(
        {pid, zi, by_class ? std::optional<std::string>(cls) : std::nullopt, at, members.size()});
    for (const auto& [gi, i] : members) {
      auto& g = s.digraphs[gi];
      g.display[i] = at;
      g.weights[i] = members.size();
      g.condensed[i] = true;
    }
  }
}

SpcScene overlay_cases(SpcScene s, const Dataset& d) {
  const auto binding = bind_attributes(s.tree, d);
  std::vector<std::string> classes = d.classes;
  for (const auto& c : s.tree.leaf_classes()) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  s.classes = std::move(classes);
  for (auto& p : s.plots) {
    for (auto& z : p.zones) z.count = 0;
  }
  s.digraphs.clear();
  std::vector<double> values(s.tree.attribute_names.size());
  for (const auto& c : d.cases) {
    for (std::size_t a = 0; a < values.size(); ++a) values[a] = c.values[binding[a]];
    const auto visit = spc_visit(s, values);
    SpcDigraph g;
    g.case_id = c.id;
    g.actual = c.label;
    g.predicted = visit.label.value_or("");
    g.misclassified = g.actual != g.predicted;
    g.plots = visit.plots;
    g.zones = visit.zones;
    g.values = visit.values;
    for (std::size_t i = 0; i < g.plots.size(); ++i) {
      auto& p = s.plots[g.plots[i]];
      ++p.zones[g.zones[i]].count;
      g.clamped = g.clamped || !p.bounds().contains(g.values[i].x, g.values[i].y);
    }
    s.digraphs.push_back(std::move(g));
  }
  refresh_geometry(s);
  if (s.density) s = zone_density_styling(std::move(s));
  return s;
}

SpcScene relocate_plot(SpcScene s, PlotId plot, Point offset) {
  if (!std::isfinite(offset.x) || !std::isfinite(offset.y)) {
    throw Error(ErrorCode::invalid_argument, "plot offset must be finite");
  }
  s.plot(plot).offset = offset;
  refresh_geometry(s);
  return s;
}

SpcScene swap_axes(SpcScene s, PlotId plot) {
  auto& p = s.plot(plot);
  p.swap = !p.swap;
  refresh_geometry(s);
  return s;
}

SpcScene flip_axis(SpcScene s, PlotId plot, char axis) {
  auto& p = s.plot(plot);
  if (axis == 'x') {
    p.x.flip = !p.x.flip;
  } else if (axis == 'y') {
    p.y.flip = !p.y.flip;
  } else {
    throw Error(ErrorCode::invalid_argument, "axis must be 'x' or 'y'");
  }
  refresh_geometry(s);
  return s;
}

SpcScene condense(SpcScene s, CondenseMode mode) {
  s.condensed = mode;
  refresh_geometry(s);
  return s;
}

SpcScene uncondense(SpcScene s) {
  s.condensed.reset();
  refresh_geometry(s);
  return s;
}

SpcScene zone_density_styling(SpcScene s) {
  s.density = true;
  std::size_t most = 0;
  for (const auto& p : s.plots) {
    for (const auto& z : p.zones) {
      if (z.action.kind == ZoneAction::Kind::terminal) most = std::max(most, z.count);
    }
  }
  for (auto& p : s.plots) {
    for (auto& z : p.zones) {
      if (z.action.kind != ZoneAction::Kind::terminal) continue;
      const double share = most ? static_cast<double>(z.count) / static_cast<double>(most) : 0.0;
      z.intensity = 0.2 + 0.8 * share;
    }
  }
  return s;
}

std::size_t drawn_vertex_count(const SpcScene& s) {
  std::size_t n = s.representatives.size();
  for (const auto& g : s.digraphs) {
    for (bool c : g.condensed) n += c ? 0 : 1;
  }
  return n;
}

void validate_rules(const SpcScene& s, const std::vector<RegionRule>& rules) {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    const auto& p = s.plot(r.plot);
    const auto b = p.bounds();
    const bool ordered = r.rect.x0 <= r.rect.x1 && r.rect.y0 <= r.rect.y1;
    const bool inside =
        r.rect.x0 >= b.x0 && r.rect.x1 <= b.x1 && r.rect.y0 >= b.y0 && r.rect.y1 <= b.y1;
    if (!ordered || !inside) {
      throw Error(ErrorCode::invalid_argument,
                  "rule " + std::to_string(i) + " rectangle lies outside plot " +
                      std::to_string(r.plot));
    }
    if (r.action == RegionRule::Action::classify_as && r.label.empty()) {
      throw Error(ErrorCode::invalid_argument, "rule " + std::to_string(i) + " has no class");
    }
  }
}

RegionDecision classify_with_regions(const SpcScene& s, const std::vector<RegionRule>& rules,
                                     std::span<const double> tree_values) {
  const auto visit = spc_visit(s, tree_values);
  for (std::size_t i = 0; i < visit.plots.size(); ++i) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const auto& rule = rules[r];
      if (rule.plot != visit.plots[i] || !rule.rect.contains(visit.values[i].x, visit.values[i].y)) {
        continue;
      }
      if (rule.action == RegionRule::Action::refuse) return {std::nullopt, true, r};
      return {rule.label, false, r};
    }
  }
  return {visit.label, false, std::nullopt};
}

RegionEvaluation evaluate_with_regions(const SpcScene& s, const std::vector<RegionRule>& rules,
                                       const Dataset& d) {
  validate_rules(s, rules);
  const auto binding = bind_attributes(s.tree, d);
  RegionEvaluation out;
  std::vector<std::string> classes = d.classes;
  for (const auto& c : s.tree.leaf_classes()) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  out.classified = ConfusionMatrix(classes);
  std::vector<double> values(s.tree.attribute_names.size());
  for (const auto& c : d.cases) {
    for (std::size_t a = 0; a < values.size(); ++a) values[a] = c.values[binding[a]];
    auto decision = classify_with_regions(s, rules, values);
    ++out.total;
    if (decision.refused) {
      ++out.refused;
    } else {
      out.classified.add(c.label, *decision.label);
    }
    out.cases.push_back({c.id, c.label, std::move(decision)});
  }
  return out;
}

}  // namespace treeglc
