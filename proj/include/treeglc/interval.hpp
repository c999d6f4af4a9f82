#pragma once

#include <algorithm>
#include <limits>

namespace treeglc {

/// Real interval with independently open or closed ends. Infinite ends are
/// allowed and always reported as open.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval closed(double a, double b) { return {a, b, true, true}; }
  static Interval half_open(double a, double b) { return {a, b, true, false}; }
  static Interval unbounded() { return {}; }

  bool contains(double v) const {
    const bool above = lo_closed ? v >= lo : v > lo;
    const bool below = hi_closed ? v <= hi : v < hi;
    return above && below;
  }

  bool empty() const {
    if (lo < hi) return false;
    return !(lo == hi && lo_closed && hi_closed);
  }

  double width() const { return hi - lo; }

  /// Tightest interval satisfying both constraints.
  Interval intersect(const Interval& o) const {
    Interval r = *this;
    if (o.lo > r.lo) {
      r.lo = o.lo;
      r.lo_closed = o.lo_closed;
    } else if (o.lo == r.lo) {
      r.lo_closed = r.lo_closed && o.lo_closed;
    }
    if (o.hi < r.hi) {
      r.hi = o.hi;
      r.hi_closed = o.hi_closed;
    } else if (o.hi == r.hi) {
      r.hi_closed = r.hi_closed && o.hi_closed;
    }
    return r;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace treeglc
