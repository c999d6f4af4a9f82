#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "treeglc/dataset.hpp"
#include "treeglc/induction.hpp"
#include "treeglc/layout_spc.hpp"
#include "treeglc/render_svg.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

using Json = nlohmann::json;

/// Two-space indented with a trailing newline; stable key order.
std::string dump(const Json& j);

/// Throws ParseError on malformed JSON text.
Json parse_json(std::string_view text);

Json to_json(const Interval& r);
Json to_json(const Dataset& d);
Json to_json(const DecisionTree& t);
Json to_json(const ConfusionMatrix& m);
Json to_json(const TracePath& p);
Json to_json(const std::vector<NodeMargins>& report);
Json to_json(const OvergeneralizationReport& r);
Json to_json(const PairSplitResult& r, const std::vector<std::string>& classes);
Json to_json(const SweepPoint& p);
Json to_json(const BcScene& s);
Json to_json(const SpcScene& s);
Json to_json(const Scene& s);
Json to_json(const RegionRule& r);
Json to_json(const std::vector<RegionRule>& rules);
Json to_json(const RegionEvaluation& e);

/// Throws FieldError naming the offending path.
DecisionTree tree_from_json(const Json& j);
ConfusionMatrix matrix_from_json(const Json& j);
BcOptions bc_options_from_json(const Json& j);
SpcOptions spc_options_from_json(const Json& j);
std::vector<Interval> ranges_from_json(const Json& j, const std::string& field = "ranges");
RegionRule rule_from_json(const Json& j, const std::string& field = "rule");
std::vector<RegionRule> rules_from_json(const Json& j, const std::string& field = "rules");

/// Rebuilds a scene from its embedded tree, ranges and options and reapplies
/// per-plot placement, condensation and density flags. Case overlays are not
/// read back; overlay them again from a dataset.
Scene scene_from_json(const Json& j);

}  // namespace treeglc
