#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/geometry.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

enum class BcScaleMode { uniform, proportional };
enum class BcStyle { sharp, smooth };

std::optional<BcScaleMode> parse_bc_scale(std::string_view s);
std::optional<BcStyle> parse_bc_style(std::string_view s);
std::string_view to_string(BcScaleMode m);
std::string_view to_string(BcStyle s);

struct BcOptions {
  BcScaleMode scale = BcScaleMode::uniform;
  BcStyle style = BcStyle::sharp;
  double base_edge_length = 100.0;
  double slope_angle = 45.0;          // degrees below the horizontal
  std::optional<double> level_height; // default base_edge_length * sin(slope)
  std::map<NodeId, Point> drag;       // moves the node's apex and its subtree

  double effective_level_height() const;
  void validate() const;  // throws Error(invalid_argument)
};

struct BcTick {
  double value = 0.0;
  Point at;
};

/// One side of an internal node. The solid segment runs from the apex
/// (value T) to `to` (the range end); `child_apex` closes the full edge and
/// the stretch between them is the dotted extension.
struct BcEdge {
  NodeId node = 0;
  Side side = Side::left;
  NodeId child = 0;
  std::size_t attribute = 0;
  Point from;
  Point to;
  Point child_apex;
  double value_at_from = 0.0;  // T
  double value_at_to = 0.0;    // range min (left) or max (right)
  double length = 0.0;         // solid segment
  bool dotted = false;
  std::vector<BcTick> ticks;
};

struct BcLeafMarker {
  NodeId leaf = 0;
  std::string label;
  std::size_t support = 0;
  double purity = 0.0;
  Point at;
};

struct BcLabel {
  Point at;
  std::string text;
};

struct BcPolyline {
  std::size_t case_id = 0;
  std::string actual;
  std::string predicted;
  std::vector<Point> points;           // one per traversed edge
  std::vector<std::size_t> edge_index; // into BcScene::edges
  std::vector<Point> bezier;           // smooth style: p0 c c p1 c c p2 ...
  bool clamped = false;
};

struct BcScene {
  DecisionTree tree;
  std::vector<Interval> ranges;  // per tree attribute
  BcOptions options;
  std::vector<std::string> classes;
  std::map<NodeId, Point> apexes;
  std::vector<BcEdge> edges;
  std::vector<BcLeafMarker> leaves;
  std::vector<BcLabel> labels;
  std::vector<BcPolyline> polylines;

  std::optional<std::size_t> edge_of(NodeId node, Side side) const;
};

/// Geometry without cases. Throws Error(invalid_argument) on a zero-width
/// range or invalid options.
BcScene layout_bc(const DecisionTree& t, const std::vector<Interval>& ranges,
                  const BcOptions& opts = {});

/// Linear map from T at the apex to the range end at `to`.
/// Throws Error(out_of_range) for a value outside the edge's range.
Point value_to_edge_position(const BcScene& s, NodeId node, Side side, double value);

/// One polyline per case of d; values outside the ranges are clamped and
/// the polyline flagged.
BcScene overlay_cases(BcScene s, const Dataset& d);

/// Catmull-Rom spline through pts as cubic Bezier control points.
std::vector<Point> smooth_through(const std::vector<Point>& pts);

}  // namespace treeglc
