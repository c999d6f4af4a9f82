#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/interval.hpp"

namespace treeglc {

using NodeId = std::size_t;

enum class NodeKind { internal, leaf };
enum class Side { left, right };

std::string_view to_string(Side s);

/// Internal nodes route value < threshold to left and value >= threshold to
/// right. Leaves carry the stored class plus support and the percentage of
/// support belonging to the stored class.
struct TreeNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::leaf;
  // internal
  std::size_t attribute = 0;  // index into DecisionTree::attribute_names
  double threshold = 0.0;
  NodeId left = 0;
  NodeId right = 0;
  // leaf
  std::string label;
  std::size_t support = 0;
  double purity = 100.0;

  bool is_leaf() const { return kind == NodeKind::leaf; }
  NodeId child(Side s) const { return s == Side::left ? left : right; }

  static TreeNode make_leaf(NodeId id, std::string label, std::size_t support, double purity);
  static TreeNode make_split(NodeId id, std::size_t attribute, double threshold, NodeId left,
                             NodeId right);
};

class DecisionTree {
 public:
  std::map<NodeId, TreeNode> nodes;
  NodeId root = 0;
  std::vector<std::string> attribute_names;

  const TreeNode& node(NodeId id) const;
  TreeNode& node(NodeId id);
  bool contains(NodeId id) const { return nodes.count(id) != 0; }

  NodeId next_id() const { return nodes.empty() ? 0 : nodes.rbegin()->first + 1; }

  /// Index of attr in attribute_names, appending it when absent.
  std::size_t intern_attribute(std::string_view attr);

  std::vector<NodeId> preorder() const;
  std::vector<NodeId> leaves() const;    // preorder
  std::vector<NodeId> internals() const; // preorder
  std::map<NodeId, NodeId> parents() const;
  std::size_t depth(NodeId id) const;     // root has depth 0
  std::size_t height() const;             // edges on the longest root-leaf path

  /// Leaf labels in preorder first-appearance order.
  std::vector<std::string> leaf_classes() const;

  /// Throws Error(invalid_argument) when the node graph is not a single rooted
  /// binary tree or an attribute index is out of range.
  void validate() const;
};

/// Same shape, attribute names and leaf annotations, ignoring node ids.
/// Thresholds and purities compare within the given tolerances.
bool equivalent(const DecisionTree& a, const DecisionTree& b, double threshold_tol = 0.0,
                double purity_tol = 0.0);

/// Maps tree attribute indices to dataset columns. Throws
/// Error(schema_mismatch) naming the first missing attribute.
std::vector<std::size_t> bind_attributes(const DecisionTree& t, const Dataset& d);

struct TraceStep {
  NodeId node = 0;
  double value = 0.0;
  double threshold = 0.0;
  Side branch = Side::left;
  double margin = 0.0;  // |value - threshold|
};

struct TracePath {
  std::vector<TraceStep> steps;
  NodeId leaf = 0;
  std::string predicted;
};

TracePath predict(const DecisionTree& t, const Case& c, std::span<const std::size_t> binding);
TracePath predict(const DecisionTree& t, const Dataset& d, const Case& c);

/// Terminal leaf per case of d, in case order.
std::vector<NodeId> route(const DecisionTree& t, const Dataset& d);

/// Rows are actual classes, columns predicted. Ratios with a zero
/// denominator are std::nullopt.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> classes);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual][predicted];
  }
  std::optional<std::size_t> index_of(std::string_view label) const;
  std::size_t add_class(const std::string& label);

  void add(std::size_t actual, std::size_t predicted, std::size_t n = 1);
  void add(std::string_view actual, std::string_view predicted);

  std::size_t total() const;
  std::size_t correct() const;
  std::size_t row_sum(std::size_t c) const;
  std::size_t col_sum(std::size_t c) const;

  std::optional<double> accuracy() const;
  std::optional<double> error_rate() const;
  std::optional<double> recall(std::size_t c) const;
  std::optional<double> precision(std::size_t c) const;
  std::optional<double> one_minus_precision(std::size_t c) const;
  std::optional<double> f1(std::size_t c) const;

  /// Actual-class cases predicted as something else.
  std::size_t false_negatives(std::size_t c) const { return row_sum(c) - at(c, c); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<std::size_t>> counts_;
};

ConfusionMatrix evaluate(const DecisionTree& t, const Dataset& d);

/// Per-attribute interval conjunction along the root-to-node path. Attributes
/// not constrained by the path are Interval::unbounded().
struct BranchConstraints {
  NodeId node = 0;
  std::vector<Interval> intervals;  // indexed like attribute_names

  /// Replaces infinite ends with the dataset's declared/data range.
  BranchConstraints resolved(const DecisionTree& t, const Dataset& d) const;
  bool satisfied_by(std::span<const double> tree_ordered_values) const;
};

BranchConstraints branch_constraints(const DecisionTree& t, NodeId node);

struct NodeMargins {
  NodeId node = 0;
  std::vector<double> margins;  // ascending
  std::optional<double> min;
  std::optional<double> median;
};

/// One entry per internal node in preorder.
std::vector<NodeMargins> margin_report(const DecisionTree& t, const Dataset& d);

}  // namespace treeglc
