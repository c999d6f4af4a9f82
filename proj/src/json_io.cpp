#include "treeglc/json_io.hpp"

#include <cmath>

#include "treeglc/error.hpp"

namespace treeglc {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(line, column, "invalid JSON");
  }
}

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json point(Point p) { return Json::array({p.x, p.y}); }

std::string at(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& member(const Json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw FieldError(path.empty() ? "$" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FieldError(at(path, key), "missing");
  return *it;
}

const Json* optional_member(const Json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw FieldError(path.empty() ? "$" : path, "expected an object");
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FieldError(path, "expected a finite number");
  return v;
}

std::size_t as_index(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw FieldError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw FieldError(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw FieldError(path, "expected a boolean");
  return j.get<bool>();
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw FieldError(path, "expected an array");
  return j;
}

Point as_point(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw FieldError(path, "expected [x, y]");
  return {as_number(j[0], at(path, 0)), as_number(j[1], at(path, 1))};
}

Json rect_json(const Rect& r) { return Json::array({r.x0, r.x1, r.y0, r.y1}); }

Rect as_rect(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) throw FieldError(path, "expected [x0, x1, y0, y1]");
  Rect r{as_number(j[0], at(path, 0)), as_number(j[1], at(path, 1)), as_number(j[2], at(path, 2)),
         as_number(j[3], at(path, 3))};
  if (r.x0 > r.x1 || r.y0 > r.y1) throw FieldError(path, "rectangle corners out of order");
  return r;
}

Json side_json(const std::optional<Side>& s) {
  return s ? Json(std::string(to_string(*s))) : Json(nullptr);
}

}  // namespace

Json to_json(const Interval& r) {
  Json j = Json::array({r.lo, r.hi});
  return j;
}

Json to_json(const Dataset& d) {
  Json attrs = Json::array();
  for (const auto& a : d.attributes) {
    Json aj{{"name", a.name}, {"missing_count", a.missing_count}};
    aj["min"] = a.observed ? Json(a.min) : Json(nullptr);
    aj["max"] = a.observed ? Json(a.max) : Json(nullptr);
    if (a.declared_min) aj["declared_min"] = *a.declared_min;
    if (a.declared_max) aj["declared_max"] = *a.declared_max;
    attrs.push_back(std::move(aj));
  }
  Json cases = Json::array();
  for (const auto& c : d.cases) {
    Json values = Json::array();
    for (double v : c.values) values.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
    cases.push_back({{"id", c.id}, {"values", std::move(values)}, {"label", c.label}});
  }
  return {{"name", d.name}, {"attributes", attrs}, {"classes", d.classes}, {"cases", cases}};
}

Json to_json(const DecisionTree& t) {
  Json nodes = Json::array();
  for (const auto& [id, n] : t.nodes) {
    Json nj{{"id", id}};
    if (n.is_leaf()) {
      nj["kind"] = "leaf";
      nj["class"] = n.label;
      nj["support"] = n.support;
      nj["purity"] = n.purity;
    } else {
      nj["kind"] = "internal";
      nj["attr"] = n.attribute;
      nj["threshold"] = n.threshold;
      nj["left"] = n.left;
      nj["right"] = n.right;
    }
    nodes.push_back(std::move(nj));
  }
  return {{"attribute_names", t.attribute_names}, {"root", t.root}, {"nodes", nodes}};
}

DecisionTree tree_from_json(const Json& j) {
  DecisionTree t;
  const auto& names = as_array(member(j, "", "attribute_names"), "attribute_names");
  for (std::size_t i = 0; i < names.size(); ++i) {
    t.attribute_names.push_back(as_string(names[i], at("attribute_names", i)));
  }
  t.root = as_index(member(j, "", "root"), "root");
  const auto& nodes = as_array(member(j, "", "nodes"), "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = at("nodes", i);
    const auto& nj = nodes[i];
    const NodeId id = as_index(member(nj, path, "id"), at(path, "id"));
    if (t.contains(id)) throw FieldError(at(path, "id"), "duplicate node id");
    const auto kind = as_string(member(nj, path, "kind"), at(path, "kind"));
    if (kind == "leaf") {
      const double purity = as_number(member(nj, path, "purity"), at(path, "purity"));
      if (purity < 0.0 || purity > 100.0) throw FieldError(at(path, "purity"), "outside [0, 100]");
      t.nodes[id] = TreeNode::make_leaf(id, as_string(member(nj, path, "class"), at(path, "class")),
                                        as_index(member(nj, path, "support"), at(path, "support")),
                                        purity);
    } else if (kind == "internal") {
      const std::size_t attr = as_index(member(nj, path, "attr"), at(path, "attr"));
      if (attr >= t.attribute_names.size()) throw FieldError(at(path, "attr"), "unknown attribute");
      t.nodes[id] = TreeNode::make_split(
          id, attr, as_number(member(nj, path, "threshold"), at(path, "threshold")),
          as_index(member(nj, path, "left"), at(path, "left")),
          as_index(member(nj, path, "right"), at(path, "right")));
    } else {
      throw FieldError(at(path, "kind"), "expected \"leaf\" or \"internal\"");
    }
  }
  try {
    t.validate();
  } catch (const Error& e) {
    throw FieldError("nodes", e.what());
  }
  return t;
}

Json to_json(const ConfusionMatrix& m) {
  Json counts = Json::array();
  Json per_class = Json::array();
  for (std::size_t a = 0; a < m.class_count(); ++a) {
    Json row = Json::array();
    for (std::size_t p = 0; p < m.class_count(); ++p) row.push_back(m.at(a, p));
    counts.push_back(std::move(row));
    per_class.push_back({{"class", m.classes()[a]},
                         {"row_sum", m.row_sum(a)},
                         {"col_sum", m.col_sum(a)},
                         {"recall", opt(m.recall(a))},
                         {"precision", opt(m.precision(a))},
                         {"one_minus_precision", opt(m.one_minus_precision(a))},
                         {"f1", opt(m.f1(a))},
                         {"false_negatives", m.false_negatives(a)}});
  }
  return {{"classes", m.classes()},     {"counts", counts},
          {"total", m.total()},         {"correct", m.correct()},
          {"accuracy", opt(m.accuracy())}, {"error_rate", opt(m.error_rate())},
          {"per_class", per_class}};
}

ConfusionMatrix matrix_from_json(const Json& j) {
  const auto& classes = as_array(member(j, "", "classes"), "classes");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes.size(); ++i) names.push_back(as_string(classes[i], at("classes", i)));
  ConfusionMatrix m(names);
  const auto& counts = as_array(member(j, "", "counts"), "counts");
  if (counts.size() != names.size()) throw FieldError("counts", "expected one row per class");
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const auto& row = as_array(counts[a], at("counts", a));
    if (row.size() != names.size()) throw FieldError(at("counts", a), "expected one cell per class");
    for (std::size_t p = 0; p < row.size(); ++p) m.add(a, p, as_index(row[p], at(at("counts", a), p)));
  }
  return m;
}

Json to_json(const TracePath& p) {
  Json steps = Json::array();
  for (const auto& s : p.steps) {
    steps.push_back({{"node", s.node},
                     {"value", s.value},
                     {"threshold", s.threshold},
                     {"branch", std::string(to_string(s.branch))},
                     {"margin", s.margin}});
  }
  return {{"steps", steps}, {"leaf", p.leaf}, {"predicted", p.predicted}};
}

Json to_json(const std::vector<NodeMargins>& report) {
  Json out = Json::array();
  for (const auto& n : report) {
    out.push_back({{"node", n.node}, {"margins", n.margins}, {"min", opt(n.min)}, {"median", opt(n.median)}});
  }
  return out;
}

Json to_json(const OvergeneralizationReport& r) {
  Json leaves = Json::array();
  for (const auto& leaf : r.leaves) {
    Json attrs = Json::array();
    for (const auto& a : leaf.attributes) {
      Json gaps = Json::array();
      for (const auto& g : a.gaps) gaps.push_back(to_json(g));
      attrs.push_back({{"attribute", a.attribute},
                       {"rule", to_json(a.rule)},
                       {"data", a.data ? to_json(*a.data) : Json(nullptr)},
                       {"gaps", gaps}});
    }
    leaves.push_back({{"leaf", leaf.leaf},
                      {"class", leaf.label},
                      {"support", leaf.support},
                      {"empty", leaf.empty},
                      {"attributes", attrs}});
  }
  return {{"leaves", leaves}};
}

Json to_json(const PairSplitResult& r, const std::vector<std::string>& classes) {
  Json quads = Json::array();
  for (const auto& q : r.quadrants) {
    quads.push_back({{"counts", q.counts},
                     {"total", q.total},
                     {"majority", q.majority ? Json(classes.at(*q.majority)) : Json(nullptr)},
                     {"purity", opt(q.purity)}});
  }
  return {{"tx", opt(r.tx)},       {"ty", opt(r.ty)},
          {"objective", r.objective}, {"degenerate_x", r.degenerate_x},
          {"degenerate_y", r.degenerate_y}, {"classes", classes},
          {"quadrants", quads}};
}

Json to_json(const SweepPoint& p) {
  return {{"threshold", p.threshold},
          {"value", opt(p.value)},
          {"accuracy", opt(p.accuracy)},
          {"metrics", to_json(p.metrics)}};
}

Json to_json(const BcScene& s) {
  Json drag = Json::object();
  for (const auto& [id, p] : s.options.drag) drag[std::to_string(id)] = point(p);
  Json opts{{"scale", std::string(to_string(s.options.scale))},
            {"style", std::string(to_string(s.options.style))},
            {"base_edge_length", s.options.base_edge_length},
            {"slope_angle", s.options.slope_angle},
            {"level_height", s.options.effective_level_height()},
            {"drag", drag}};
  Json ranges = Json::array();
  for (const auto& r : s.ranges) ranges.push_back(to_json(r));

  Json edges = Json::array();
  for (const auto& e : s.edges) {
    Json ticks = Json::array();
    for (const auto& t : e.ticks) ticks.push_back({{"value", t.value}, {"at", point(t.at)}});
    edges.push_back({{"node", e.node},
                     {"side", std::string(to_string(e.side))},
                     {"child", e.child},
                     {"attr", e.attribute},
                     {"from", point(e.from)},
                     {"to", point(e.to)},
                     {"child_apex", point(e.child_apex)},
                     {"range", Json::array({e.value_at_from, e.value_at_to})},
                     {"length", e.length},
                     {"dotted", e.dotted},
                     {"ticks", ticks}});
  }
  Json leaves = Json::array();
  for (const auto& l : s.leaves) {
    leaves.push_back({{"leaf", l.leaf},
                      {"class", l.label},
                      {"support", l.support},
                      {"purity", l.purity},
                      {"at", point(l.at)}});
  }
  Json labels = Json::array();
  for (const auto& l : s.labels) labels.push_back({{"at", point(l.at)}, {"text", l.text}});
  Json polylines = Json::array();
  for (const auto& p : s.polylines) {
    Json pts = Json::array();
    for (const auto& q : p.points) pts.push_back(point(q));
    Json pj{{"case_id", p.case_id},
            {"class", p.actual},
            {"predicted", p.predicted},
            {"points", pts},
            {"edges", p.edge_index},
            {"clamped", p.clamped}};
    if (!p.bezier.empty()) {
      Json bz = Json::array();
      for (const auto& q : p.bezier) bz.push_back(point(q));
      pj["bezier"] = bz;
    }
    polylines.push_back(std::move(pj));
  }
  return {{"kind", "bc"},       {"tree", to_json(s.tree)}, {"ranges", ranges},
          {"options", opts},    {"classes", s.classes},    {"edges", edges},
          {"leaves", leaves},   {"labels", labels},        {"polylines", polylines}};
}

Json to_json(const SpcScene& s) {
  Json ranges = Json::array();
  for (const auto& r : s.ranges) ranges.push_back(to_json(r));
  Json opts{{"plot_size", s.options.plot_size},
            {"gap", s.options.gap},
            {"stair_drop", s.options.stair_drop}};
  auto axis = [&](const SpcAxis& a) {
    return Json{{"attr", a.attribute},
                {"name", s.tree.attribute_names[a.attribute]},
                {"range", Json::array({a.lo, a.hi})},
                {"flip", a.flip}};
  };
  Json plots = Json::array();
  for (const auto& p : s.plots) {
    Json zones = Json::array();
    for (const auto& z : p.zones) {
      Json action;
      if (z.action.kind == ZoneAction::Kind::terminal) {
        action = {{"kind", "terminal"}, {"class", z.action.label}, {"leaf", z.action.leaf}};
      } else {
        action = {{"kind", "forward"}, {"destination", z.action.destination}, {"shade", z.action.shade}};
      }
      zones.push_back({{"rect", rect_json(z.rect)},
                       {"action", action},
                       {"x_side", side_json(z.x_side)},
                       {"y_side", side_json(z.y_side)},
                       {"count", z.count},
                       {"intensity", opt(z.intensity)}});
    }
    const char* kind = p.kind == SpcPlot::Kind::primary   ? "primary"
                       : p.kind == SpcPlot::Kind::sibling ? "sibling"
                                                          : "degenerate";
    plots.push_back({{"id", p.id},
                     {"kind", kind},
                     {"x_node", p.x_node},
                     {"y_node", p.y_node},
                     {"axes", {{"x", axis(p.x)}, {"y", axis(p.y)}, {"swap", p.swap}}},
                     {"offset", point(p.offset)},
                     {"size", p.size},
                     {"zones", zones}});
  }
  Json arrows = Json::array();
  for (const auto& a : s.arrows) {
    arrows.push_back({{"from_plot", a.from_plot},
                      {"zone", a.zone},
                      {"to_plot", a.to_plot},
                      {"shade", a.shade},
                      {"from", point(a.from)},
                      {"to", point(a.to)}});
  }
  Json digraphs = Json::array();
  for (const auto& g : s.digraphs) {
    Json vertices = Json::array();
    Json values = Json::array();
    for (std::size_t i = 0; i < g.display.size(); ++i) {
      vertices.push_back(point(g.display[i]));
      values.push_back(point(g.values[i]));
    }
    Json gj{{"case_id", g.case_id},
            {"class", g.actual},
            {"predicted", g.predicted},
            {"misclassified", g.misclassified},
            {"clamped", g.clamped},
            {"plots", g.plots},
            {"zones", g.zones},
            {"values", values},
            {"vertices", vertices}};
    if (s.condensed) gj["weights"] = g.weights;
    digraphs.push_back(std::move(gj));
  }
  Json reps = Json::array();
  for (const auto& r : s.representatives) {
    reps.push_back({{"plot", r.plot},
                    {"zone", r.zone},
                    {"class", r.cls ? Json(*r.cls) : Json(nullptr)},
                    {"at", point(r.at)},
                    {"weight", r.weight}});
  }
  return {{"kind", "spc"},
          {"tree", to_json(s.tree)},
          {"ranges", ranges},
          {"options", opts},
          {"classes", s.classes},
          {"plots", plots},
          {"arrows", arrows},
          {"digraphs", digraphs},
          {"condensed", s.condensed ? Json(std::string(to_string(*s.condensed))) : Json(nullptr)},
          {"representatives", reps},
          {"density", s.density}};
}

Json to_json(const Scene& s) {
  return std::visit([](const auto& sc) { return to_json(sc); }, s);
}

Json to_json(const RegionRule& r) {
  Json j{{"plot", r.plot}, {"rect", rect_json(r.rect)}};
  if (r.action == RegionRule::Action::refuse) {
    j["action"] = "refuse";
  } else {
    j["action"] = "classify_as";
    j["class"] = r.label;
  }
  return j;
}

Json to_json(const std::vector<RegionRule>& rules) {
  Json out = Json::array();
  for (const auto& r : rules) out.push_back(to_json(r));
  return out;
}

Json to_json(const RegionEvaluation& e) {
  Json cases = Json::array();
  for (const auto& c : e.cases) {
    cases.push_back({{"case_id", c.case_id},
                     {"actual", c.actual},
                     {"predicted", c.decision.label ? Json(*c.decision.label) : Json(nullptr)},
                     {"refused", c.decision.refused},
                     {"rule", c.decision.rule ? Json(*c.decision.rule) : Json(nullptr)}});
  }
  return {{"total", e.total},
          {"refused", e.refused},
          {"classified", e.total - e.refused},
          {"metrics", to_json(e.classified)},
          {"cases", cases}};
}

BcOptions bc_options_from_json(const Json& j) {
  BcOptions o;
  const std::string base = "options";
  if (const auto* v = optional_member(j, base, "scale")) {
    auto m = parse_bc_scale(as_string(*v, at(base, "scale")));
    if (!m) throw FieldError(at(base, "scale"), "expected uniform or proportional");
    o.scale = *m;
  }
  if (const auto* v = optional_member(j, base, "style")) {
    auto m = parse_bc_style(as_string(*v, at(base, "style")));
    if (!m) throw FieldError(at(base, "style"), "expected sharp or smooth");
    o.style = *m;
  }
  if (const auto* v = optional_member(j, base, "base_edge_length")) {
    o.base_edge_length = as_number(*v, at(base, "base_edge_length"));
  }
  if (const auto* v = optional_member(j, base, "slope_angle")) {
    o.slope_angle = as_number(*v, at(base, "slope_angle"));
  }
  if (const auto* v = optional_member(j, base, "level_height")) {
    o.level_height = as_number(*v, at(base, "level_height"));
  }
  if (const auto* v = optional_member(j, base, "drag")) {
    if (!v->is_object()) throw FieldError(at(base, "drag"), "expected an object");
    for (const auto& [key, value] : v->items()) {
      const std::string path = at(at(base, "drag"), key);
      std::size_t id = 0;
      try {
        std::size_t used = 0;
        id = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw FieldError(path, "node ids must be integers");
      }
      o.drag[id] = as_point(value, path);
    }
  }
  try {
    o.validate();
  } catch (const Error& e) {
    throw FieldError(base, e.what());
  }
  return o;
}

SpcOptions spc_options_from_json(const Json& j) {
  SpcOptions o;
  const std::string base = "options";
  if (const auto* v = optional_member(j, base, "plot_size")) o.plot_size = as_number(*v, at(base, "plot_size"));
  if (const auto* v = optional_member(j, base, "gap")) o.gap = as_number(*v, at(base, "gap"));
  if (const auto* v = optional_member(j, base, "stair_drop")) o.stair_drop = as_number(*v, at(base, "stair_drop"));
  try {
    o.validate();
  } catch (const Error& e) {
    throw FieldError(base, e.what());
  }
  return o;
}

std::vector<Interval> ranges_from_json(const Json& j, const std::string& field) {
  std::vector<Interval> out;
  const auto& arr = as_array(j, field);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = as_point(arr[i], at(field, i));
    if (p.x > p.y) throw FieldError(at(field, i), "range bounds out of order");
    out.push_back(Interval::closed(p.x, p.y));
  }
  return out;
}

RegionRule rule_from_json(const Json& j, const std::string& field) {
  RegionRule r;
  r.plot = as_index(member(j, field, "plot"), at(field, "plot"));
  r.rect = as_rect(member(j, field, "rect"), at(field, "rect"));
  const auto action = as_string(member(j, field, "action"), at(field, "action"));
  if (action == "refuse") {
    r.action = RegionRule::Action::refuse;
  } else if (action == "classify_as") {
    r.action = RegionRule::Action::classify_as;
    r.label = as_string(member(j, field, "class"), at(field, "class"));
  } else {
    throw FieldError(at(field, "action"), "expected refuse or classify_as");
  }
  return r;
}

std::vector<RegionRule> rules_from_json(const Json& j, const std::string& field) {
  std::vector<RegionRule> out;
  const auto& arr = as_array(j, field);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(rule_from_json(arr[i], at(field, i)));
  return out;
}

Scene scene_from_json(const Json& j) {
  const auto kind = as_string(member(j, "", "kind"), "kind");
  DecisionTree tree;
  try {
    tree = tree_from_json(member(j, "", "tree"));
  } catch (const FieldError& e) {
    throw FieldError("tree." + e.field(), e.what());
  }
  const auto ranges = ranges_from_json(member(j, "", "ranges"));
  const Json empty = Json::object();
  const Json& opts = j.contains("options") ? j["options"] : empty;
  if (kind == "bc") return layout_bc(tree, ranges, bc_options_from_json(opts));
  if (kind != "spc") throw FieldError("kind", "expected bc or spc");

  SpcScene s = build_spc(tree, ranges, spc_options_from_json(opts));
  if (const auto* plots = optional_member(j, "", "plots")) {
    as_array(*plots, "plots");
    for (std::size_t i = 0; i < plots->size(); ++i) {
      const std::string path = at("plots", i);
      const auto& pj = (*plots)[i];
      const PlotId id = as_index(member(pj, path, "id"), at(path, "id"));
      if (id >= s.plots.size()) throw FieldError(at(path, "id"), "unknown plot");
      auto& p = s.plots[id];
      if (const auto* v = optional_member(pj, path, "offset")) p.offset = as_point(*v, at(path, "offset"));
      if (const auto* axes = optional_member(pj, path, "axes")) {
        const std::string ap = at(path, "axes");
        if (const auto* v = optional_member(*axes, ap, "swap")) p.swap = as_bool(*v, at(ap, "swap"));
        for (const char* name : {"x", "y"}) {
          if (const auto* ax = optional_member(*axes, ap, name)) {
            if (const auto* f = optional_member(*ax, at(ap, name), "flip")) {
              (name[0] == 'x' ? p.x : p.y).flip = as_bool(*f, at(at(ap, name), "flip"));
            }
          }
        }
      }
    }
  }
  if (const auto* v = optional_member(j, "", "condensed")) {
    auto m = parse_condense_mode(as_string(*v, "condensed"));
    if (!m) throw FieldError("condensed", "expected per_zone_center or per_zone_per_class");
    s.condensed = m;
  }
  if (const auto* v = optional_member(j, "", "density")) s.density = as_bool(*v, "density");
  refresh_geometry(s);
  if (s.density) s = zone_density_styling(std::move(s));
  return s;
}

}  // namespace treeglc
