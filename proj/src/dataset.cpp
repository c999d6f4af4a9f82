#include "treeglc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "treeglc/error.hpp"

namespace treeglc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Uniform integer in [0, n) from a 64-bit engine without modulo bias.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(rng, i)]);
  }
}

}  // namespace

std::optional<std::size_t> Dataset::attribute_index(std::string_view attr) const {
  for (const auto& a : attributes) {
    if (a.name == attr) return a.index;
  }
  return std::nullopt;
}

std::optional<std::size_t> Dataset::class_index(std::string_view label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes.size(), 0);
  for (const auto& c : cases) ++counts[*class_index(c.label)];
  return counts;
}

bool Dataset::has_missing() const {
  return std::any_of(attributes.begin(), attributes.end(),
                     [](const AttributeMeta& a) { return a.missing_count > 0; });
}

void recompute_ranges(Dataset& d) {
  for (auto& a : d.attributes) {
    a.missing_count = 0;
    a.observed = false;
    a.min = 0.0;
    a.max = 0.0;
  }
  for (const auto& c : d.cases) {
    for (std::size_t i = 0; i < d.attributes.size(); ++i) {
      auto& a = d.attributes[i];
      const double v = c.values[i];
      if (std::isnan(v)) {
        ++a.missing_count;
      } else if (!a.observed) {
        a.min = a.max = v;
        a.observed = true;
      } else {
        a.min = std::min(a.min, v);
        a.max = std::max(a.max, v);
      }
    }
  }
}

Dataset parse_csv(std::istream& in, std::string name, const CsvOptions& opts) {
  Dataset d;
  d.name = std::move(name);

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_row(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(line_no, 0, "missing header row");

  auto class_it = std::find(header.begin(), header.end(), opts.class_column);
  if (class_it == header.end()) {
    throw Error(ErrorCode::schema_mismatch,
                "class column '" + opts.class_column + "' not in header");
  }
  const auto class_col = static_cast<std::size_t>(class_it - header.begin());
  for (std::size_t col = 0; col < header.size(); ++col) {
    if (col == class_col) continue;
    AttributeMeta a;
    a.name = header[col];
    a.index = d.attributes.size();
    if (d.attribute_index(a.name)) {
      throw ParseError(line_no, col + 1, "duplicate attribute name '" + a.name + "'");
    }
    d.attributes.push_back(std::move(a));
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, 0,
                       "expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    }
    Case c;
    c.id = d.cases.size();
    c.values.reserve(d.attributes.size());
    for (std::size_t col = 0; col < cells.size(); ++col) {
      if (col == class_col) {
        c.label = cells[col];
        continue;
      }
      if (cells[col] == opts.missing_token) {
        c.values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      auto v = parse_number(cells[col]);
      if (!v) {
        throw ParseError(line_no, col + 1,
                         "non-numeric cell '" + cells[col] + "' in column '" + header[col] + "'");
      }
      c.values.push_back(*v);
    }
    if (c.label.empty()) throw ParseError(line_no, class_col + 1, "empty class label");
    if (!d.class_index(c.label)) d.classes.push_back(c.label);
    d.cases.push_back(std::move(c));
  }
  recompute_ranges(d);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_csv(in, path.stem().string(), opts);
}

std::string to_csv(const Dataset& d, const CsvOptions& opts) {
  std::ostringstream out;
  for (const auto& a : d.attributes) out << a.name << ',';
  out << opts.class_column << '\n';
  for (const auto& c : d.cases) {
    for (double v : c.values) {
      out << (std::isnan(v) ? opts.missing_token : format_shortest(v)) << ',';
    }
    out << c.label << '\n';
  }
  return out.str();
}

Dataset with_declared_ranges(Dataset d,
                             const std::map<std::string, std::pair<double, double>>& bounds) {
  for (const auto& [name, b] : bounds) {
    auto idx = d.attribute_index(name);
    if (!idx) throw Error(ErrorCode::schema_mismatch, "unknown attribute '" + name + "'");
    if (b.first > b.second) {
      throw Error(ErrorCode::invalid_argument, "declared range of '" + name + "' is inverted");
    }
    d.attributes[*idx].declared_min = b.first;
    d.attributes[*idx].declared_max = b.second;
  }
  return d;
}

std::optional<ImputeStrategy> parse_impute_strategy(std::string_view s) {
  if (s == "column_mean_rounded" || s == "mean") return ImputeStrategy::column_mean_rounded;
  if (s == "column_median" || s == "median") return ImputeStrategy::column_median;
  if (s == "drop_rows" || s == "drop") return ImputeStrategy::drop_rows;
  return std::nullopt;
}

std::string_view to_string(ImputeStrategy s) {
  switch (s) {
    case ImputeStrategy::column_mean_rounded: return "column_mean_rounded";
    case ImputeStrategy::column_median: return "column_median";
    case ImputeStrategy::drop_rows: return "drop_rows";
  }
  return "column_mean_rounded";
}

Dataset impute_missing(const Dataset& d, ImputeStrategy strategy) {
  Dataset out = d;
  if (!d.has_missing()) return out;

  if (strategy == ImputeStrategy::drop_rows) {
    std::erase_if(out.cases, [](const Case& c) {
      return std::any_of(c.values.begin(), c.values.end(), [](double v) { return std::isnan(v); });
    });
    recompute_ranges(out);
    return out;
  }

  for (const auto& a : d.attributes) {
    if (a.missing_count == 0) continue;
    std::vector<double> present;
    for (const auto& c : d.cases) {
      if (!std::isnan(c.values[a.index])) present.push_back(c.values[a.index]);
    }
    if (present.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "attribute '" + a.name + "' is entirely missing; cannot impute");
    }
    double fill = 0.0;
    if (strategy == ImputeStrategy::column_mean_rounded) {
      const double sum = std::accumulate(present.begin(), present.end(), 0.0);
      fill = std::round(sum / static_cast<double>(present.size()));
    } else {
      std::sort(present.begin(), present.end());
      const std::size_t n = present.size();
      fill = n % 2 == 1 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
    }
    for (auto& c : out.cases) {
      if (std::isnan(c.values[a.index])) c.values[a.index] = fill;
    }
  }
  recompute_ranges(out);
  return out;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& positions) {
  Dataset out;
  out.name = d.name;
  out.attributes = d.attributes;
  out.classes = d.classes;
  out.cases.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= d.cases.size()) throw Error(ErrorCode::out_of_range, "case position out of range");
    out.cases.push_back(d.cases[p]);
  }
  // ranges stay those of the parent
  for (auto& a : out.attributes) a.missing_count = 0;
  for (const auto& c : out.cases) {
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (std::isnan(c.values[i])) ++out.attributes[i].missing_count;
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitSpec& s) {
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "train_fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(s.seed);
  std::vector<bool> in_train(d.cases.size(), false);

  auto take = [&](std::vector<std::size_t> group) {
    shuffle(group, rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(s.train_fraction * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < n_train; ++i) in_train[group[i]] = true;
  };

  if (s.stratified) {
    for (const auto& cls : d.classes) {
      std::vector<std::size_t> group;
      for (std::size_t i = 0; i < d.cases.size(); ++i) {
        if (d.cases[i].label == cls) group.push_back(i);
      }
      take(std::move(group));
    }
  } else {
    std::vector<std::size_t> all(d.cases.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    take(std::move(all));
  }

  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < d.cases.size(); ++i) (in_train[i] ? train : test).push_back(i);
  return {subset(d, train), subset(d, test)};
}

}  // namespace treeglc
