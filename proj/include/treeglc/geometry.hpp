#pragma once

#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/interval.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

/// Scene coordinates; y grows downward.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double k, Point p) { return {k * p.x, k * p.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

double length(Point p);

/// Closed axis range per tree attribute (indexed like attribute_names),
/// taken from d and widened to contain every threshold on that attribute.
std::vector<Interval> attribute_ranges(const DecisionTree& t, const Dataset& d);

/// Fallback when no data is at hand: thresholds of each attribute padded by
/// their spread, or by 1 when the attribute has a single threshold.
std::vector<Interval> threshold_ranges(const DecisionTree& t);

}  // namespace treeglc
