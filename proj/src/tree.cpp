#include "treeglc/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "treeglc/error.hpp"

namespace treeglc {

std::string_view to_string(Side s) { return s == Side::left ? "left" : "right"; }

TreeNode TreeNode::make_leaf(NodeId id, std::string label, std::size_t support, double purity) {
  TreeNode n;
  n.id = id;
  n.kind = NodeKind::leaf;
  n.label = std::move(label);
  n.support = support;
  n.purity = purity;
  return n;
}

TreeNode TreeNode::make_split(NodeId id, std::size_t attribute, double threshold, NodeId left,
                              NodeId right) {
  TreeNode n;
  n.id = id;
  n.kind = NodeKind::internal;
  n.attribute = attribute;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return n;
}

const TreeNode& DecisionTree::node(NodeId id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::not_found, "unknown node " + std::to_string(id));
  return it->second;
}

TreeNode& DecisionTree::node(NodeId id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::not_found, "unknown node " + std::to_string(id));
  return it->second;
}

std::size_t DecisionTree::intern_attribute(std::string_view attr) {
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    if (attribute_names[i] == attr) return i;
  }
  attribute_names.emplace_back(attr);
  return attribute_names.size() - 1;
}

std::vector<NodeId> DecisionTree::preorder() const {
  std::vector<NodeId> order;
  if (nodes.empty()) return order;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& n = node(id);
    if (!n.is_leaf()) {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return order;
}

std::vector<NodeId> DecisionTree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId id : preorder()) {
    if (node(id).is_leaf()) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> DecisionTree::internals() const {
  std::vector<NodeId> out;
  for (NodeId id : preorder()) {
    if (!node(id).is_leaf()) out.push_back(id);
  }
  return out;
}

std::map<NodeId, NodeId> DecisionTree::parents() const {
  std::map<NodeId, NodeId> p;
  for (const auto& [id, n] : nodes) {
    if (!n.is_leaf()) {
      p[n.left] = id;
      p[n.right] = id;
    }
  }
  return p;
}

std::size_t DecisionTree::depth(NodeId id) const {
  const auto p = parents();
  node(id);
  std::size_t d = 0;
  while (id != root) {
    id = p.at(id);
    ++d;
  }
  return d;
}

std::size_t DecisionTree::height() const {
  std::function<std::size_t(NodeId)> h = [&](NodeId id) -> std::size_t {
    const auto& n = node(id);
    if (n.is_leaf()) return 0;
    return 1 + std::max(h(n.left), h(n.right));
  };
  return nodes.empty() ? 0 : h(root);
}

std::vector<std::string> DecisionTree::leaf_classes() const {
  std::vector<std::string> out;
  for (NodeId id : leaves()) {
    const auto& label = node(id).label;
    if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
  }
  return out;
}

void DecisionTree::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (nodes.empty()) fail("tree has no nodes");
  if (!contains(root)) fail("root " + std::to_string(root) + " is not a node");
  std::map<NodeId, std::size_t> parent_count;
  for (const auto& [id, n] : nodes) {
    if (n.id != id) fail("node key " + std::to_string(id) + " disagrees with node id");
    if (n.is_leaf()) {
      if (n.label.empty()) fail("leaf " + std::to_string(id) + " has no class");
      continue;
    }
    if (n.attribute >= attribute_names.size()) {
      fail("node " + std::to_string(id) + " references attribute index " +
           std::to_string(n.attribute) + " outside the attribute list");
    }
    if (!std::isfinite(n.threshold)) fail("node " + std::to_string(id) + " threshold not finite");
    if (n.left == n.right) fail("node " + std::to_string(id) + " has identical children");
    for (NodeId c : {n.left, n.right}) {
      if (!contains(c)) fail("node " + std::to_string(id) + " child " + std::to_string(c) + " missing");
      if (c == root) fail("root appears as a child");
      ++parent_count[c];
    }
  }
  for (const auto& [id, count] : parent_count) {
    if (count > 1) fail("node " + std::to_string(id) + " has more than one parent");
  }
  // reachability also rules out cycles
  std::set<NodeId> seen;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) fail("cycle through node " + std::to_string(id));
    const auto& n = node(id);
    if (!n.is_leaf()) {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  if (seen.size() != nodes.size()) fail("tree has nodes unreachable from the root");
}

bool equivalent(const DecisionTree& a, const DecisionTree& b, double threshold_tol,
                double purity_tol) {
  std::function<bool(NodeId, NodeId)> eq = [&](NodeId x, NodeId y) {
    const auto& n = a.node(x);
    const auto& m = b.node(y);
    if (n.kind != m.kind) return false;
    if (n.is_leaf()) {
      return n.label == m.label && n.support == m.support &&
             std::abs(n.purity - m.purity) <= purity_tol;
    }
    return a.attribute_names[n.attribute] == b.attribute_names[m.attribute] &&
           std::abs(n.threshold - m.threshold) <= threshold_tol && eq(n.left, m.left) &&
           eq(n.right, m.right);
  };
  if (a.nodes.empty() || b.nodes.empty()) return a.nodes.empty() && b.nodes.empty();
  return eq(a.root, b.root);
}

std::vector<std::size_t> bind_attributes(const DecisionTree& t, const Dataset& d) {
  std::vector<std::size_t> binding;
  binding.reserve(t.attribute_names.size());
  for (const auto& name : t.attribute_names) {
    auto idx = d.attribute_index(name);
    if (!idx) {
      throw Error(ErrorCode::schema_mismatch,
                  "tree attribute '" + name + "' is not in dataset '" + d.name + "'");
    }
    binding.push_back(*idx);
  }
  return binding;
}

TracePath predict(const DecisionTree& t, const Case& c, std::span<const std::size_t> binding) {
  TracePath path;
  NodeId id = t.root;
  for (;;) {
    const auto& n = t.node(id);
    if (n.is_leaf()) {
      path.leaf = id;
      path.predicted = n.label;
      return path;
    }
    const double v = c.values.at(binding[n.attribute]);
    if (std::isnan(v)) {
      throw Error(ErrorCode::invalid_argument,
                  "case " + std::to_string(c.id) + " is missing attribute '" +
                      t.attribute_names[n.attribute] + "'");
    }
    const Side side = v < n.threshold ? Side::left : Side::right;
    path.steps.push_back({id, v, n.threshold, side, std::abs(v - n.threshold)});
    id = n.child(side);
  }
}

TracePath predict(const DecisionTree& t, const Dataset& d, const Case& c) {
  const auto binding = bind_attributes(t, d);
  return predict(t, c, binding);
}

std::vector<NodeId> route(const DecisionTree& t, const Dataset& d) {
  const auto binding = bind_attributes(t, d);
  std::vector<NodeId> leaves;
  leaves.reserve(d.cases.size());
  for (const auto& c : d.cases) leaves.push_back(predict(t, c, binding).leaf);
  return leaves;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)),
      counts_(classes_.size(), std::vector<std::size_t>(classes_.size(), 0)) {}

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view label) const {
  auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::size_t ConfusionMatrix::add_class(const std::string& label) {
  if (auto i = index_of(label)) return *i;
  classes_.push_back(label);
  for (auto& row : counts_) row.push_back(0);
  counts_.emplace_back(classes_.size(), 0);
  return classes_.size() - 1;
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::size_t n) {
  counts_.at(actual).at(predicted) += n;
}

void ConfusionMatrix::add(std::string_view actual, std::string_view predicted) {
  add(add_class(std::string(actual)), add_class(std::string(predicted)));
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (const auto& row : counts_) {
    for (auto v : row) s += v;
  }
  return s;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) s += counts_[i][i];
  return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::size_t s = 0;
  for (auto v : counts_.at(c)) s += v;
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::size_t s = 0;
  for (const auto& row : counts_) s += row.at(c);
  return s;
}

namespace {
std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

std::optional<double> ConfusionMatrix::accuracy() const { return ratio(correct(), total()); }

std::optional<double> ConfusionMatrix::error_rate() const {
  return ratio(total() - correct(), total());
}

std::optional<double> ConfusionMatrix::recall(std::size_t c) const {
  return ratio(at(c, c), row_sum(c));
}

std::optional<double> ConfusionMatrix::precision(std::size_t c) const {
  return ratio(at(c, c), col_sum(c));
}

std::optional<double> ConfusionMatrix::one_minus_precision(std::size_t c) const {
  return ratio(col_sum(c) - at(c, c), col_sum(c));
}

std::optional<double> ConfusionMatrix::f1(std::size_t c) const {
  auto p = precision(c);
  auto r = recall(c);
  if (!p || !r || *p + *r == 0.0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

ConfusionMatrix evaluate(const DecisionTree& t, const Dataset& d) {
  ConfusionMatrix m(d.classes);
  for (const auto& label : t.leaf_classes()) m.add_class(label);
  const auto binding = bind_attributes(t, d);
  for (const auto& c : d.cases) {
    const auto path = predict(t, c, binding);
    m.add(*m.index_of(c.label), *m.index_of(path.predicted));
  }
  return m;
}

BranchConstraints branch_constraints(const DecisionTree& t, NodeId target) {
  t.node(target);
  BranchConstraints bc;
  bc.node = target;
  bc.intervals.assign(t.attribute_names.size(), Interval::unbounded());
  const auto parents = t.parents();
  NodeId id = target;
  while (id != t.root) {
    const NodeId p = parents.at(id);
    const auto& pn = t.node(p);
    const Interval step = pn.left == id
                              ? Interval{-std::numeric_limits<double>::infinity(), pn.threshold,
                                         false, false}
                              : Interval{pn.threshold, std::numeric_limits<double>::infinity(),
                                         true, false};
    bc.intervals[pn.attribute] = bc.intervals[pn.attribute].intersect(step);
    id = p;
  }
  return bc;
}

BranchConstraints BranchConstraints::resolved(const DecisionTree& t, const Dataset& d) const {
  BranchConstraints out = *this;
  const auto binding = bind_attributes(t, d);
  for (std::size_t i = 0; i < out.intervals.size(); ++i) {
    const auto range = d.attributes[binding[i]].range();
    auto& iv = out.intervals[i];
    if (std::isinf(iv.lo)) {
      iv.lo = std::min(range.lo, iv.hi);
      iv.lo_closed = true;
    }
    if (std::isinf(iv.hi)) {
      iv.hi = std::max(range.hi, iv.lo);
      iv.hi_closed = true;
    }
  }
  return out;
}

bool BranchConstraints::satisfied_by(std::span<const double> values) const {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!intervals[i].contains(values[i])) return false;
  }
  return true;
}

std::vector<NodeMargins> margin_report(const DecisionTree& t, const Dataset& d) {
  const auto binding = bind_attributes(t, d);
  std::map<NodeId, std::vector<double>> by_node;
  for (NodeId id : t.internals()) by_node[id];
  for (const auto& c : d.cases) {
    for (const auto& step : predict(t, c, binding).steps) by_node[step.node].push_back(step.margin);
  }
  std::vector<NodeMargins> out;
  for (NodeId id : t.internals()) {
    NodeMargins nm;
    nm.node = id;
    nm.margins = std::move(by_node[id]);
    std::sort(nm.margins.begin(), nm.margins.end());
    if (!nm.margins.empty()) {
      const std::size_t n = nm.margins.size();
      nm.min = nm.margins.front();
      nm.median = n % 2 == 1 ? nm.margins[n / 2] : 0.5 * (nm.margins[n / 2 - 1] + nm.margins[n / 2]);
    }
    out.push_back(std::move(nm));
  }
  return out;
}

}  // namespace treeglc
