#include <algorithm>
#include <cmath>

#include "treeglc/error.hpp"
#include "treeglc/induction.hpp"

namespace treeglc {

std::optional<PairObjective> parse_pair_objective(std::string_view s) {
  if (s == "pure_count") return PairObjective::pure_count;
  if (s == "area_proxy") return PairObjective::area_proxy;
  if (s == "gini_quadrants") return PairObjective::gini_quadrants;
  return std::nullopt;
}

std::string_view to_string(PairObjective o) {
  switch (o) {
    case PairObjective::pure_count: return "pure_count";
    case PairObjective::area_proxy: return "area_proxy";
    case PairObjective::gini_quadrants: return "gini_quadrants";
  }
  return "pure_count";
}

std::size_t quadrant_of(double x, double y, std::optional<double> tx, std::optional<double> ty) {
  const bool right = !tx || x >= *tx;
  const bool upper = !ty || y >= *ty;
  return (right ? 1u : 0u) + (upper ? 2u : 0u);
}

namespace {

struct Extent {
  double lo = 0.0;
  double hi = 0.0;
  // Share of the normalized axis below t; an absent threshold puts nothing below.
  double lower_share(std::optional<double> t) const {
    if (!t) return 0.0;
    if (hi == lo) return 0.5;
    return std::clamp((*t - lo) / (hi - lo), 0.0, 1.0);
  }
};

struct Extents {
  Extent x, y;
};

Extents extents_of(std::span<const PairCase> cases) {
  Extents e;
  if (cases.empty()) return e;
  e.x = {cases[0].x, cases[0].x};
  e.y = {cases[0].y, cases[0].y};
  for (const auto& c : cases) {
    e.x.lo = std::min(e.x.lo, c.x);
    e.x.hi = std::max(e.x.hi, c.x);
    e.y.lo = std::min(e.y.lo, c.y);
    e.y.hi = std::max(e.y.hi, c.y);
  }
  return e;
}

// counts[q][cls] for the four quadrants.
double score(const std::vector<std::vector<std::size_t>>& counts, std::size_t n,
             const Extents& ext, std::optional<double> tx, std::optional<double> ty,
             PairObjective objective) {
  double value = 0.0;
  const double wx = ext.x.lower_share(tx);
  const double wy = ext.y.lower_share(ty);
  for (std::size_t q = 0; q < 4; ++q) {
    std::size_t nq = 0;
    std::size_t nonzero = 0;
    for (auto c : counts[q]) {
      nq += c;
      nonzero += c ? 1 : 0;
    }
    switch (objective) {
      case PairObjective::pure_count:
        if (nonzero == 1) value += static_cast<double>(nq);
        break;
      case PairObjective::area_proxy:
        if (nonzero == 1) {
          const double w = (q & 1u) ? 1.0 - wx : wx;
          const double h = (q & 2u) ? 1.0 - wy : wy;
          value += w * h;
        }
        break;
      case PairObjective::gini_quadrants:
        if (nq) value += static_cast<double>(nq) / static_cast<double>(n) * gini(counts[q]);
        break;
    }
  }
  return objective == PairObjective::gini_quadrants ? 1.0 - value : value;
}

std::vector<std::optional<double>> axis_options(std::vector<double> values) {
  auto cands = candidate_thresholds(std::move(values));
  std::vector<std::optional<double>> opts;
  if (cands.empty()) {
    opts.emplace_back(std::nullopt);
  } else {
    opts.assign(cands.begin(), cands.end());
  }
  return opts;
}

// Number of candidates <= v, i.e. the first candidate index with v < candidate.
std::size_t rank_of(double v, const std::vector<std::optional<double>>& opts) {
  if (!opts.front()) return 0;
  std::size_t r = 0;
  while (r < opts.size() && *opts[r] <= v) ++r;
  return r;
}

}  // namespace

double pair_objective_value(std::span<const PairCase> cases, std::size_t class_count,
                            std::optional<double> tx, std::optional<double> ty,
                            PairObjective objective) {
  std::vector<std::vector<std::size_t>> counts(4, std::vector<std::size_t>(class_count, 0));
  for (const auto& c : cases) ++counts[quadrant_of(c.x, c.y, tx, ty)][c.cls];
  return score(counts, cases.size(), extents_of(cases), tx, ty, objective);
}

PairSplitResult pair_split_search(std::span<const PairCase> cases, std::size_t class_count,
                                  PairObjective objective) {
  if (cases.size() < 2) throw Error(ErrorCode::invalid_argument, "pair split needs >= 2 cases");
  for (const auto& c : cases) {
    if (c.cls >= class_count) throw Error(ErrorCode::invalid_argument, "class index out of range");
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw Error(ErrorCode::invalid_argument, "pair split values must be finite");
    }
  }

  std::vector<double> xs, ys;
  for (const auto& c : cases) {
    xs.push_back(c.x);
    ys.push_back(c.y);
  }
  const auto ox = axis_options(std::move(xs));
  const auto oy = axis_options(std::move(ys));
  const std::size_t nx = ox.front() ? ox.size() : 0;
  const std::size_t ny = oy.front() ? oy.size() : 0;

  // prefix[k][a][b]: cases of class k whose x-rank < a and y-rank < b, where
  // rank counts the candidates not exceeding the value. Being left of
  // candidate i means x-rank <= i, i.e. prefix index i + 1.
  const std::size_t A = nx + 2;
  const std::size_t B = ny + 2;
  std::vector<std::size_t> prefix(class_count * A * B, 0);
  auto at = [&](std::size_t k, std::size_t a, std::size_t b) -> std::size_t& {
    return prefix[(k * A + a) * B + b];
  };
  for (const auto& c : cases) ++at(c.cls, rank_of(c.x, ox) + 1, rank_of(c.y, oy) + 1);
  for (std::size_t k = 0; k < class_count; ++k) {
    for (std::size_t a = 1; a < A; ++a) {
      for (std::size_t b = 1; b < B; ++b) {
        at(k, a, b) += at(k, a - 1, b) + at(k, a, b - 1) - at(k, a - 1, b - 1);
      }
    }
  }
  std::vector<std::size_t> totals(class_count, 0);
  for (const auto& c : cases) ++totals[c.cls];

  const Extents ext = extents_of(cases);
  std::vector<std::vector<std::size_t>> q(4, std::vector<std::size_t>(class_count, 0));
  PairSplitResult best;
  bool have = false;
  for (std::size_t i = 0; i < ox.size(); ++i) {
    const std::size_t ai = ox[i] ? i + 1 : 0;
    for (std::size_t j = 0; j < oy.size(); ++j) {
      const std::size_t bj = oy[j] ? j + 1 : 0;
      for (std::size_t k = 0; k < class_count; ++k) {
        const std::size_t ll = at(k, ai, bj);
        const std::size_t left = at(k, ai, B - 1);
        const std::size_t low = at(k, A - 1, bj);
        q[0][k] = ll;
        q[1][k] = low - ll;
        q[2][k] = left - ll;
        q[3][k] = totals[k] - left - low + ll;
      }
      const double v = score(q, cases.size(), ext, ox[i], oy[j], objective);
      // near-equal scores are ties
      if (!have || v > best.objective + 1e-12 * std::max(1.0, std::abs(best.objective))) {
        have = true;
        best.objective = v;
        best.tx = ox[i];
        best.ty = oy[j];
      }
    }
  }

  best.degenerate_x = !ox.front();
  best.degenerate_y = !oy.front();
  best.quadrants.assign(4, QuadrantSummary{});
  for (auto& s : best.quadrants) s.counts.assign(class_count, 0);
  for (const auto& c : cases) ++best.quadrants[quadrant_of(c.x, c.y, best.tx, best.ty)].counts[c.cls];
  for (auto& s : best.quadrants) {
    for (std::size_t k = 0; k < class_count; ++k) {
      s.total += s.counts[k];
      if (s.counts[k] && (!s.majority || s.counts[k] > s.counts[*s.majority])) s.majority = k;
    }
    if (s.total) {
      s.purity = 100.0 * static_cast<double>(s.counts[*s.majority]) / static_cast<double>(s.total);
    }
  }
  return best;
}

std::vector<PairCase> pair_cases(const Dataset& d, std::size_t attr_x, std::size_t attr_y) {
  if (attr_x >= d.attributes.size() || attr_y >= d.attributes.size()) {
    throw Error(ErrorCode::not_found, "attribute index out of range");
  }
  std::vector<PairCase> out;
  out.reserve(d.cases.size());
  for (const auto& c : d.cases) {
    out.push_back({c.values[attr_x], c.values[attr_y], *d.class_index(c.label)});
  }
  return out;
}

}  // namespace treeglc
