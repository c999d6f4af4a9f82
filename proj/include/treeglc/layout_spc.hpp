#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/geometry.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

using PlotId = std::size_t;

/// x0 <= x1, y0 <= y1, in attribute units of the plot's axes.
struct Rect {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  double area() const { return (x1 - x0) * (y1 - y0); }
  Point center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct ZoneAction {
  enum class Kind { terminal, forward };
  Kind kind = Kind::terminal;
  std::string label;       // terminal
  NodeId leaf = 0;         // terminal
  PlotId destination = 0;  // forward
  std::size_t shade = 0;   // forward: rank of the destination among all destinations
};

/// A zone is selected by comparisons, not by its rectangle: x_side is the
/// side of the plot's X node the case must take, y_side that of its Y node.
/// An absent side matches either.
struct Zone {
  Rect rect;
  ZoneAction action;
  std::optional<Side> x_side;
  std::optional<Side> y_side;
  std::size_t count = 0;             // cases ending here (terminal) or passing (forward)
  std::optional<double> intensity;   // set by zone_density_styling
};

struct SpcAxis {
  std::size_t attribute = 0;  // tree attribute index
  double lo = 0.0;
  double hi = 1.0;
  bool flip = false;
};

struct SpcPlot {
  enum class Kind { primary, sibling, degenerate };
  PlotId id = 0;
  Kind kind = Kind::primary;
  NodeId x_node = 0;
  NodeId y_node = 0;  // equals x_node for a degenerate plot
  SpcAxis x;
  SpcAxis y;
  bool swap = false;  // draw Y horizontally
  Point offset;
  double size = 200.0;
  std::vector<Zone> zones;

  /// Scene position of an attribute-unit point, honoring flip and swap.
  Point to_scene(double vx, double vy) const;
  Rect bounds() const { return {x.lo, x.hi, y.lo, y.hi}; }
};

struct SpcArrow {
  PlotId from_plot = 0;
  std::size_t zone = 0;
  PlotId to_plot = 0;
  std::size_t shade = 0;
  Point from;
  Point to;
};

struct SpcDigraph {
  std::size_t case_id = 0;
  std::string actual;
  std::string predicted;
  bool misclassified = false;
  bool clamped = false;
  std::vector<PlotId> plots;         // visit order
  std::vector<std::size_t> zones;    // zone index in each visited plot
  std::vector<Point> values;         // attribute units, one per plot
  std::vector<Point> points;         // scene position before condensation
  std::vector<Point> display;        // scene position as drawn
  std::vector<std::size_t> weights;  // group size when condensed, else 1
  std::vector<bool> condensed;
};

enum class CondenseMode { per_zone_center, per_zone_per_class };
std::optional<CondenseMode> parse_condense_mode(std::string_view s);
std::string_view to_string(CondenseMode m);

struct SpcRepresentative {
  PlotId plot = 0;
  std::size_t zone = 0;
  std::optional<std::string> cls;
  Point at;
  std::size_t weight = 0;
};

struct SpcOptions {
  double plot_size = 200.0;
  double gap = 40.0;
  double stair_drop = 60.0;
  void validate() const;
};

struct SpcScene {
  DecisionTree tree;
  std::vector<Interval> ranges;
  SpcOptions options;
  std::vector<std::string> classes;
  std::vector<SpcPlot> plots;
  std::vector<SpcArrow> arrows;
  std::vector<SpcDigraph> digraphs;
  std::optional<CondenseMode> condensed;
  std::vector<SpcRepresentative> representatives;
  bool density = false;

  const SpcPlot& plot(PlotId id) const;
  SpcPlot& plot(PlotId id);
  std::size_t forward_zone_count() const;
  std::size_t zone_count() const;
};

/// Plot per even-depth internal node u, paired with its first internal child
/// (left before right). When both children are internal the second one gets
/// a sibling plot of its own. A node whose children are both leaves gets a
/// degenerate plot with its attribute on both axes. Ids are assigned level by
/// level, left to right; placement is a stair of plots.
SpcScene build_spc(const DecisionTree& t, const std::vector<Interval>& ranges,
                   const SpcOptions& opts = {});

struct SpcVisit {
  std::vector<PlotId> plots;
  std::vector<std::size_t> zones;
  std::vector<Point> values;
  std::optional<std::string> label;  // terminal class; absent for an empty scene
  NodeId leaf = 0;
};

/// Follows forwarding zones for tree-ordered attribute values.
SpcVisit spc_visit(const SpcScene& s, std::span<const double> tree_values);

SpcScene overlay_cases(SpcScene s, const Dataset& d);

SpcScene relocate_plot(SpcScene s, PlotId plot, Point offset);
SpcScene swap_axes(SpcScene s, PlotId plot);
SpcScene flip_axis(SpcScene s, PlotId plot, char axis);  // 'x' or 'y' attribute axis

SpcScene condense(SpcScene s, CondenseMode mode);
SpcScene uncondense(SpcScene s);

/// Terminal zone intensities in [0.2, 1] growing with the case count.
SpcScene zone_density_styling(SpcScene s);

/// Distinct vertices drawn: uncondensed vertices plus representatives.
std::size_t drawn_vertex_count(const SpcScene& s);

/// Recomputes scene positions of arrows, vertices and representatives from
/// the plots' current geometry.
void refresh_geometry(SpcScene& s);

// ---------------------------------------------------------------------------
// Region rules.

struct RegionRule {
  enum class Action { classify_as, refuse };
  PlotId plot = 0;
  Rect rect;  // attribute units of the plot's X and Y axes, closed
  Action action = Action::refuse;
  std::string label;  // classify_as
};

/// Throws Error(not_found) for an unknown plot, Error(invalid_argument) for a
/// rectangle outside the plot bounds.
void validate_rules(const SpcScene& s, const std::vector<RegionRule>& rules);

struct RegionDecision {
  std::optional<std::string> label;  // absent when refused
  bool refused = false;
  std::optional<std::size_t> rule;   // index of the deciding rule
};

RegionDecision classify_with_regions(const SpcScene& s, const std::vector<RegionRule>& rules,
                                     std::span<const double> tree_values);

struct RegionCaseResult {
  std::size_t case_id = 0;
  std::string actual;
  RegionDecision decision;
};

struct RegionEvaluation {
  std::vector<RegionCaseResult> cases;
  ConfusionMatrix classified;  // refused cases are left out
  std::size_t refused = 0;
  std::size_t total = 0;
};

RegionEvaluation evaluate_with_regions(const SpcScene& s, const std::vector<RegionRule>& rules,
                                       const Dataset& d);

}  // namespace treeglc
