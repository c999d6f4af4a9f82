#pragma once

#include <map>
#include <string>
#include <string_view>

#include "treeglc/tree.hpp"

namespace treeglc {

/// Indented rule text, one condition per line:
///
///   - petal-length < 2.4500 then class = Iris-setosa (100.00 % of 50 examples)
///   - petal-length >= 2.4500
///     - petal-width < 1.7500
///     ...
///
/// Two spaces or one tab per level; "-" bullets optional; ">=" may be written
/// "≥"; "classe" and "cases" are accepted as keyword variants.
struct TreeTextOptions {
  std::map<std::string, std::string> aliases;  // attribute spelling -> dataset name
};

/// Aliases for the misspelled Wine attribute names seen in published trees.
std::map<std::string, std::string> default_aliases();

/// Throws ParseError with the 1-based line of the first violation; never
/// returns a partial tree.
DecisionTree parse_tree_text(std::string_view text, const TreeTextOptions& opts = {});

inline DecisionTree parse_tree_text_with_default_aliases(std::string_view text) {
  return parse_tree_text(text, TreeTextOptions{default_aliases()});
}

/// Canonical form: "- " bullets, two-space indent, 4-decimal thresholds,
/// "<" branch first, leaf clause "then class = C (pp.pp % of n examples)".
std::string serialize_tree_text(const DecisionTree& t);

}  // namespace treeglc
