#include "treeglc/induction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "treeglc/error.hpp"

namespace treeglc {

double entropy(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double gini(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double s = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / n;
    s += p * p;
  }
  return 1.0 - s;
}

std::vector<double> candidate_thresholds(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  for (std::size_t i = 1; i < values.size(); ++i) out.push_back(0.5 * (values[i - 1] + values[i]));
  return out;
}

namespace {

// Class indices of d ordered by class name.
std::vector<std::size_t> name_order(const std::vector<std::string>& classes) {
  std::vector<std::size_t> order(classes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return classes[a] < classes[b]; });
  return order;
}

std::vector<std::size_t> reorder(const std::vector<std::size_t>& counts,
                                 const std::vector<std::size_t>& order) {
  std::vector<std::size_t> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(counts[i]);
  return out;
}

std::optional<std::size_t> majority(const std::vector<std::size_t>& counts,
                                    const std::vector<std::size_t>& order) {
  std::optional<std::size_t> best;
  for (auto i : order) {
    if (counts[i] == 0) continue;
    if (!best || counts[i] > counts[*best]) best = i;
  }
  return best;
}

class Inducer {
 public:
  Inducer(const Dataset& d, const InductionParams& p)
      : d_(d), p_(p), order_(name_order(d.classes)) {
    for (const auto& c : d.cases) labels_.push_back(*d.class_index(c.label));
  }

  DecisionTree run() {
    std::vector<std::size_t> all(d_.cases.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    // Tree-local attribute dictionary in preorder first-use order.
    DecisionTree t;
    std::map<std::size_t, std::size_t> remap;
    t.nodes = std::move(nodes_);
    t.root = 0;
    for (NodeId id : t.internals()) {
      auto& n = t.node(id);
      auto it = remap.find(n.attribute);
      if (it == remap.end()) {
        it = remap.emplace(n.attribute, t.attribute_names.size()).first;
        t.attribute_names.push_back(d_.attributes[n.attribute].name);
      }
      n.attribute = it->second;
    }
    return t;
  }

 private:
  double impurity(const std::vector<std::size_t>& counts) const {
    const auto c = reorder(counts, order_);
    return p_.criterion == SplitCriterion::gini ? gini(c) : entropy(c);
  }

  NodeId grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const NodeId id = next_++;
    std::vector<std::size_t> counts(d_.classes.size(), 0);
    for (auto i : idx) ++counts[labels_[i]];
    const auto maj = majority(counts, order_);
    const std::size_t n = idx.size();
    const double purity = n ? 100.0 * static_cast<double>(counts[*maj]) / static_cast<double>(n) : 0.0;

    auto make_leaf = [&] {
      nodes_[id] = TreeNode::make_leaf(id, maj ? d_.classes[*maj] : d_.classes.front(), n, purity);
      return id;
    };
    if (depth >= p_.max_depth || purity >= p_.min_purity_stop || n < 2 * p_.min_samples_leaf) {
      return make_leaf();
    }

    const double parent_imp = impurity(counts);
    double best_gain = 1e-12;
    std::optional<std::pair<std::size_t, double>> best;
    for (std::size_t a = 0; a < d_.attributes.size(); ++a) {
      std::vector<std::size_t> sorted = idx;
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t x, std::size_t y) {
        return d_.cases[x].values[a] < d_.cases[y].values[a];
      });
      std::vector<std::size_t> left(d_.classes.size(), 0);
      std::vector<std::size_t> right = counts;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        ++left[labels_[sorted[k]]];
        --right[labels_[sorted[k]]];
        const double v = d_.cases[sorted[k]].values[a];
        const double next = d_.cases[sorted[k + 1]].values[a];
        if (!(v < next)) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < p_.min_samples_leaf || nr < p_.min_samples_leaf) continue;
        const double w = (static_cast<double>(nl) * impurity(left) +
                          static_cast<double>(nr) * impurity(right)) /
                         static_cast<double>(n);
        const double gain = parent_imp - w;
        if (gain > best_gain) {
          best_gain = gain;
          best = {a, 0.5 * (v + next)};
        }
      }
    }
    if (!best) return make_leaf();

    std::vector<std::size_t> lo, hi;
    for (auto i : idx) (d_.cases[i].values[best->first] < best->second ? lo : hi).push_back(i);
    nodes_[id] = TreeNode::make_split(id, best->first, best->second, 0, 0);
    const NodeId l = grow(lo, depth + 1);
    const NodeId r = grow(hi, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  const Dataset& d_;
  const InductionParams& p_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> labels_;
  std::map<NodeId, TreeNode> nodes_;
  NodeId next_ = 0;
};

void check_params(const InductionParams& p) {
  if (p.min_samples_leaf < 1) throw Error(ErrorCode::invalid_argument, "min_samples_leaf must be >= 1");
  if (p.max_depth < 1) throw Error(ErrorCode::invalid_argument, "max_depth must be >= 1");
  if (!(p.min_purity_stop > 0.0 && p.min_purity_stop <= 100.0)) {
    throw Error(ErrorCode::invalid_argument, "min_purity_stop must lie in (0, 100]");
  }
}

// Class counts of the cases of d reaching each node (not only leaves).
std::map<NodeId, std::vector<std::size_t>> node_counts(const DecisionTree& t, const Dataset& d) {
  std::map<NodeId, std::vector<std::size_t>> counts;
  for (const auto& [id, n] : t.nodes) {
    (void)n;
    counts[id].assign(d.classes.size(), 0);
  }
  const auto binding = bind_attributes(t, d);
  for (const auto& c : d.cases) {
    const auto path = predict(t, c, binding);
    const auto cls = *d.class_index(c.label);
    for (const auto& s : path.steps) ++counts[s.node][cls];
    ++counts[path.leaf][cls];
  }
  return counts;
}

std::size_t sum(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{0});
}

}  // namespace

DecisionTree train(const Dataset& d, const InductionParams& p) {
  check_params(p);
  if (d.cases.empty()) throw Error(ErrorCode::invalid_argument, "cannot train on an empty dataset");
  if (d.has_missing()) {
    throw Error(ErrorCode::invalid_argument, "dataset has missing values; impute before training");
  }
  return Inducer(d, p).run();
}

DecisionTree refresh_leaf_stats(DecisionTree t, const Dataset& d, bool relabel) {
  const auto counts = node_counts(t, d);
  const auto order = name_order(d.classes);
  for (NodeId id : t.leaves()) {
    auto& leaf = t.node(id);
    const auto& c = counts.at(id);
    leaf.support = sum(c);
    if (relabel) {
      if (auto m = majority(c, order)) leaf.label = d.classes[*m];
    }
    const auto cls = d.class_index(leaf.label);
    leaf.purity = (leaf.support && cls)
                      ? 100.0 * static_cast<double>(c[*cls]) / static_cast<double>(leaf.support)
                      : 0.0;
  }
  return t;
}

EditResult set_threshold(const DecisionTree& t, NodeId node, double threshold, const Dataset& d,
                         bool relabel_leaves) {
  const auto& n = t.node(node);
  if (n.is_leaf()) {
    throw Error(ErrorCode::invalid_argument, "node " + std::to_string(node) + " is a leaf");
  }
  const auto binding = bind_attributes(t, d);
  const auto& attr = d.attributes[binding[n.attribute]];
  if (!std::isfinite(threshold) || !attr.range().contains(threshold)) {
    throw Error(ErrorCode::out_of_range, "threshold outside range of '" + attr.name + "'");
  }
  DecisionTree edited = t;
  edited.node(node).threshold = threshold;
  edited = refresh_leaf_stats(std::move(edited), d, relabel_leaves);
  auto metrics = evaluate(edited, d);
  return {std::move(edited), std::move(metrics)};
}

DecisionTree add_split(const DecisionTree& t, NodeId leaf, const std::string& attribute,
                       double threshold, const Dataset& d) {
  if (!t.node(leaf).is_leaf()) {
    throw Error(ErrorCode::invalid_argument, "node " + std::to_string(leaf) + " is not a leaf");
  }
  if (!d.attribute_index(attribute)) {
    throw Error(ErrorCode::schema_mismatch, "unknown attribute '" + attribute + "'");
  }
  if (!std::isfinite(threshold)) throw Error(ErrorCode::invalid_argument, "threshold not finite");

  DecisionTree out = t;
  const std::string inherited = out.node(leaf).label;
  const NodeId l = out.next_id();
  const NodeId r = l + 1;
  const std::size_t a = out.intern_attribute(attribute);
  out.nodes[leaf] = TreeNode::make_split(leaf, a, threshold, l, r);
  out.nodes[l] = TreeNode::make_leaf(l, inherited, 0, 0.0);
  out.nodes[r] = TreeNode::make_leaf(r, inherited, 0, 0.0);

  const auto counts = node_counts(out, d);
  const auto order = name_order(d.classes);
  for (NodeId id : {l, r}) {
    if (auto m = majority(counts.at(id), order)) out.node(id).label = d.classes[*m];
  }
  return refresh_leaf_stats(std::move(out), d, false);
}

DecisionTree remove_subtree(const DecisionTree& t, NodeId node, const Dataset& d) {
  if (node == t.root) throw Error(ErrorCode::invalid_argument, "cannot remove the root");
  const auto& n = t.node(node);
  if (n.is_leaf()) {
    throw Error(ErrorCode::invalid_argument, "node " + std::to_string(node) + " is already a leaf");
  }
  const auto counts = node_counts(t, d);
  const auto order = name_order(d.classes);

  DecisionTree out = t;
  std::string label;
  std::vector<NodeId> stack{n.left, n.right};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& c = out.node(id);
    if (c.is_leaf()) {
      if (label.empty()) label = c.label;
    } else {
      stack.push_back(c.right);
      stack.push_back(c.left);
    }
    out.nodes.erase(id);
  }
  if (auto m = majority(counts.at(node), order)) label = d.classes[*m];
  out.nodes[node] = TreeNode::make_leaf(node, label, 0, 0.0);

  // drop attributes no longer referenced
  std::vector<std::string> names;
  std::map<std::size_t, std::size_t> remap;
  for (NodeId id : out.internals()) {
    auto& in = out.node(id);
    auto it = remap.find(in.attribute);
    if (it == remap.end()) {
      it = remap.emplace(in.attribute, names.size()).first;
      names.push_back(out.attribute_names[in.attribute]);
    }
    in.attribute = it->second;
  }
  out.attribute_names = std::move(names);
  return refresh_leaf_stats(std::move(out), d, false);
}

std::vector<Interval> interval_gaps(const Interval& rule, const Interval& data) {
  std::vector<Interval> gaps;
  if (data.lo > rule.lo) {
    gaps.push_back({rule.lo, std::min(data.lo, rule.hi), rule.lo_closed, false});
  }
  if (data.hi < rule.hi) {
    gaps.push_back({std::max(data.hi, rule.lo), rule.hi, false, rule.hi_closed});
  }
  std::erase_if(gaps, [](const Interval& g) { return g.empty(); });
  return gaps;
}

OvergeneralizationReport overgeneralize_report(const DecisionTree& t, const Dataset& d) {
  const auto binding = bind_attributes(t, d);
  std::map<NodeId, std::vector<const Case*>> reaching;
  for (const auto& c : d.cases) reaching[predict(t, c, binding).leaf].push_back(&c);

  OvergeneralizationReport report;
  for (NodeId id : t.leaves()) {
    const auto& leaf = t.node(id);
    const auto rules = branch_constraints(t, id).resolved(t, d);
    const auto& cases = reaching[id];
    LeafSlack ls;
    ls.leaf = id;
    ls.label = leaf.label;
    ls.support = cases.size();
    ls.empty = cases.empty();
    for (std::size_t a = 0; a < t.attribute_names.size(); ++a) {
      AttributeSlack s;
      s.attribute = a;
      s.rule = rules.intervals[a];
      if (!cases.empty()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const Case* c : cases) {
          lo = std::min(lo, c->values[binding[a]]);
          hi = std::max(hi, c->values[binding[a]]);
        }
        s.data = Interval::closed(lo, hi);
        s.gaps = interval_gaps(s.rule, *s.data);
      }
      ls.attributes.push_back(std::move(s));
    }
    report.leaves.push_back(std::move(ls));
  }
  return report;
}

std::optional<SweepObjective> SweepObjective::parse(std::string_view s) {
  SweepObjective o;
  if (s == "accuracy") return o;
  auto take = [&](std::string_view prefix, Kind kind) -> std::optional<SweepObjective> {
    if (s.substr(0, prefix.size()) != prefix || s.size() == prefix.size()) return std::nullopt;
    o.kind = kind;
    o.target_class = std::string(s.substr(prefix.size()));
    return o;
  };
  if (auto r = take("fn:", Kind::false_negatives)) return r;
  if (auto r = take("false_negatives:", Kind::false_negatives)) return r;
  if (auto r = take("recall:", Kind::recall)) return r;
  return std::nullopt;
}

std::string SweepObjective::to_string() const {
  switch (kind) {
    case Kind::accuracy: return "accuracy";
    case Kind::false_negatives: return "fn:" + target_class;
    case Kind::recall: return "recall:" + target_class;
  }
  return "accuracy";
}

std::vector<SweepPoint> threshold_sweep(const DecisionTree& t, NodeId node, const Dataset& d,
                                        const SweepObjective& objective) {
  const auto& n = t.node(node);
  if (n.is_leaf()) {
    throw Error(ErrorCode::invalid_argument, "node " + std::to_string(node) + " is a leaf");
  }
  std::optional<std::size_t> target;
  if (objective.kind != SweepObjective::Kind::accuracy) {
    target = d.class_index(objective.target_class);
    if (!target) {
      throw Error(ErrorCode::invalid_argument, "unknown class '" + objective.target_class + "'");
    }
  }
  const auto binding = bind_attributes(t, d);
  std::vector<double> values;
  for (const auto& c : d.cases) {
    for (const auto& s : predict(t, c, binding).steps) {
      if (s.node == node) values.push_back(s.value);
    }
  }
  std::vector<SweepPoint> sweep;
  for (double th : candidate_thresholds(std::move(values))) {
    auto r = set_threshold(t, node, th, d);
    SweepPoint p;
    p.threshold = th;
    p.accuracy = r.metrics.accuracy();
    switch (objective.kind) {
      case SweepObjective::Kind::accuracy: p.value = p.accuracy; break;
      case SweepObjective::Kind::false_negatives:
        p.value = static_cast<double>(r.metrics.false_negatives(*target));
        break;
      case SweepObjective::Kind::recall: p.value = r.metrics.recall(*target); break;
    }
    p.metrics = std::move(r.metrics);
    sweep.push_back(std::move(p));
  }
  return sweep;
}

std::optional<SweepPoint> best_sweep_point(const std::vector<SweepPoint>& sweep,
                                           const SweepObjective& objective) {
  const SweepPoint* best = nullptr;
  auto better = [&](const SweepPoint& a, const SweepPoint& b) {
    if (*a.value != *b.value) return objective.minimize() ? *a.value < *b.value : *a.value > *b.value;
    return a.accuracy.value_or(0.0) > b.accuracy.value_or(0.0);
  };
  for (const auto& p : sweep) {
    if (!p.value) continue;
    if (!best || better(p, *best)) best = &p;
  }
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace treeglc
