#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/interval.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

enum class SplitCriterion { entropy_gain, gini };

struct InductionParams {
  SplitCriterion criterion = SplitCriterion::entropy_gain;
  std::size_t min_samples_leaf = 1;
  std::size_t max_depth = 8;
  double min_purity_stop = 100.0;  // percent
};

/// Impurity of a class-count vector. Empty input has zero impurity.
double entropy(std::span<const std::size_t> counts);
double gini(std::span<const std::size_t> counts);

/// Midpoints between consecutive distinct sorted values.
std::vector<double> candidate_thresholds(std::vector<double> values);

/// Greedy top-down induction. Ties in gain go to the lower attribute index,
/// then the lower threshold; majority ties go to the lexicographically
/// smallest class name, so the result does not depend on case order.
DecisionTree train(const Dataset& d, const InductionParams& p);

/// Recomputes support and purity of every leaf by rerouting d. With relabel,
/// each non-empty leaf takes its majority class; otherwise labels are kept.
DecisionTree refresh_leaf_stats(DecisionTree t, const Dataset& d, bool relabel = false);

struct EditResult {
  DecisionTree tree;
  ConfusionMatrix metrics;
};

EditResult set_threshold(const DecisionTree& t, NodeId node, double threshold, const Dataset& d,
                         bool relabel_leaves = false);

/// Turns a leaf into a split on the named attribute; the two new leaves take
/// the majority class of the cases of d reaching them.
DecisionTree add_split(const DecisionTree& t, NodeId leaf, const std::string& attribute,
                       double threshold, const Dataset& d);

/// Collapses a non-root internal node into a leaf labelled by the majority of
/// the cases of d reaching it.
DecisionTree remove_subtree(const DecisionTree& t, NodeId node, const Dataset& d);

// ---------------------------------------------------------------------------
// Simultaneous split on a pair of attributes.

enum class PairObjective { pure_count, area_proxy, gini_quadrants };

std::optional<PairObjective> parse_pair_objective(std::string_view s);
std::string_view to_string(PairObjective o);

struct PairCase {
  double x = 0.0;
  double y = 0.0;
  std::size_t cls = 0;  // dense class index
};

/// Quadrant order: 0 = (x<tx, y<ty), 1 = (x>=tx, y<ty), 2 = (x<tx, y>=ty),
/// 3 = (x>=tx, y>=ty).
struct QuadrantSummary {
  std::vector<std::size_t> counts;  // per class
  std::size_t total = 0;
  std::optional<std::size_t> majority;
  std::optional<double> purity;  // percent; absent when empty
};

/// A missing threshold means that axis had no candidate; every case is then
/// on the upper side of it.
struct PairSplitResult {
  std::optional<double> tx;
  std::optional<double> ty;
  std::vector<QuadrantSummary> quadrants;  // size 4
  double objective = 0.0;
  bool degenerate_x = false;
  bool degenerate_y = false;
};

std::size_t quadrant_of(double x, double y, std::optional<double> tx, std::optional<double> ty);

/// Scores one candidate point directly over the cases.
double pair_objective_value(std::span<const PairCase> cases, std::size_t class_count,
                            std::optional<double> tx, std::optional<double> ty,
                            PairObjective objective);

/// Exhaustive search of the candidate grid. Ties go to the smaller tx, then
/// the smaller ty.
PairSplitResult pair_split_search(std::span<const PairCase> cases, std::size_t class_count,
                                  PairObjective objective = PairObjective::pure_count);

/// Convenience: cases of d on two dataset attributes.
std::vector<PairCase> pair_cases(const Dataset& d, std::size_t attr_x, std::size_t attr_y);

// ---------------------------------------------------------------------------
// Overgeneralization: rule interval vs span of supporting data.

struct AttributeSlack {
  std::size_t attribute = 0;  // tree attribute index
  Interval rule;
  std::optional<Interval> data;  // absent when no case reaches the leaf
  std::vector<Interval> gaps;    // rule minus data hull, at most two pieces
};

struct LeafSlack {
  NodeId leaf = 0;
  std::string label;
  std::size_t support = 0;
  bool empty = false;
  std::vector<AttributeSlack> attributes;
};

struct OvergeneralizationReport {
  std::vector<LeafSlack> leaves;
};

/// Difference rule \ [data.lo, data.hi] as up to two intervals.
std::vector<Interval> interval_gaps(const Interval& rule, const Interval& data);

OvergeneralizationReport overgeneralize_report(const DecisionTree& t, const Dataset& d);

// ---------------------------------------------------------------------------
// Threshold sweep.

struct SweepObjective {
  enum class Kind { accuracy, false_negatives, recall };
  Kind kind = Kind::accuracy;
  std::string target_class;  // for false_negatives and recall

  static std::optional<SweepObjective> parse(std::string_view s);  // accuracy | fn:C | recall:C
  std::string to_string() const;
  /// Direction of improvement.
  bool minimize() const { return kind == Kind::false_negatives; }
};

struct SweepPoint {
  double threshold = 0.0;
  std::optional<double> value;  // absent when the objective is undefined
  std::optional<double> accuracy;
  ConfusionMatrix metrics;
};

std::vector<SweepPoint> threshold_sweep(const DecisionTree& t, NodeId node, const Dataset& d,
                                        const SweepObjective& objective);

/// Best point of a sweep by the objective's direction; ties go to the first.
std::optional<SweepPoint> best_sweep_point(const std::vector<SweepPoint>& sweep,
                                           const SweepObjective& objective);

}  // namespace treeglc
