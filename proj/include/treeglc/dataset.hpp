#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treeglc/interval.hpp"

namespace treeglc {

/// Per-attribute bookkeeping. min/max come from the data; declared bounds,
/// when present, widen the axis range used for layout and constraints.
struct AttributeMeta {
  std::string name;
  std::size_t index = 0;
  double min = 0.0;
  double max = 0.0;
  std::size_t missing_count = 0;
  bool observed = false;  // false when every cell is missing (empty range)
  std::optional<double> declared_min;
  std::optional<double> declared_max;

  double lower() const { return declared_min ? std::min(*declared_min, min) : min; }
  double upper() const { return declared_max ? std::max(*declared_max, max) : max; }
  Interval range() const { return Interval::closed(lower(), upper()); }
};

/// One row. Missing cells hold NaN until imputed.
struct Case {
  std::vector<double> values;
  std::string label;
  std::size_t id = 0;
};

struct Dataset {
  std::string name;
  std::vector<AttributeMeta> attributes;
  std::vector<std::string> classes;  // first-appearance order
  std::vector<Case> cases;

  std::optional<std::size_t> attribute_index(std::string_view attr) const;
  std::optional<std::size_t> class_index(std::string_view label) const;
  std::vector<std::size_t> class_counts() const;
  bool has_missing() const;
};

struct CsvOptions {
  std::string class_column = "class";
  std::string missing_token = "?";
};

Dataset parse_csv(std::istream& in, std::string name, const CsvOptions& opts = {});
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Class column is written last; missing cells use the missing token. Values
/// are printed in shortest round-trip form, so reloading reproduces the data.
std::string to_csv(const Dataset& d, const CsvOptions& opts = {});

/// Recomputes data ranges and missing counts from the case values.
void recompute_ranges(Dataset& d);

/// Applies declared axis bounds by attribute name. Unknown names throw.
Dataset with_declared_ranges(Dataset d,
                             const std::map<std::string, std::pair<double, double>>& bounds);

enum class ImputeStrategy { column_mean_rounded, column_median, drop_rows };

std::optional<ImputeStrategy> parse_impute_strategy(std::string_view s);
std::string_view to_string(ImputeStrategy s);

Dataset impute_missing(const Dataset& d, ImputeStrategy strategy);

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Deterministic shuffle-and-cut. Both halves keep the original file order and
/// case ids; class lists are copied from d so matrices stay aligned.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitSpec& s);

/// Restriction of d to the given case positions (not ids), in that order.
Dataset subset(const Dataset& d, const std::vector<std::size_t>& positions);

}  // namespace treeglc
