#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/tree.hpp"
#include "treeglc/tree_text.hpp"

namespace treeglc::testing {

inline std::filesystem::path data_dir() { return TREEGLC_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset iris() { return load_csv(data_dir() / "iris.csv"); }
inline Dataset wine() { return load_csv(data_dir() / "wine.csv"); }
inline Dataset wbc_raw() { return load_csv(data_dir() / "wbc.csv"); }
inline Dataset wbc() { return impute_missing(wbc_raw(), ImputeStrategy::column_mean_rounded); }

inline DecisionTree published_tree(const std::string& name) {
  return parse_tree_text_with_default_aliases(slurp(data_dir() / "trees" / (name + ".txt")));
}

struct PublishedCase {
  std::string name;
  Dataset (*data)();
};

inline std::vector<PublishedCase> published_cases() {
  return {{"wbc_small", wbc}, {"wbc", wbc}, {"iris", iris}, {"wine", wine}, {"wbc_sepics", wbc}};
}

/// Printed confusion matrix: rows are actual classes.
struct TableFixture {
  double error_rate = 0.0;
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> rows;
};

inline TableFixture load_table(const std::string& name) {
  std::istringstream in(slurp(data_dir() / "tables" / (name + ".txt")));
  TableFixture t;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "error_rate") {
      ls >> t.error_rate;
    } else if (head == "classes") {
      for (std::string c; ls >> c;) t.classes.push_back(c);
    } else {
      std::vector<std::size_t> row;
      for (std::size_t v; ls >> v;) row.push_back(v);
      t.rows.push_back(row);
    }
  }
  return t;
}

/// Tree walk written against the node map only, independent of predict().
inline std::string walk(const DecisionTree& t, const Dataset& d, const Case& c) {
  NodeId at = t.root;
  while (!t.node(at).is_leaf()) {
    const auto& n = t.node(at);
    const auto col = *d.attribute_index(t.attribute_names[n.attribute]);
    at = c.values[col] < n.threshold ? n.left : n.right;
  }
  return t.node(at).label;
}

/// Counts matrix (rows actual, columns predicted) over the union of classes,
/// dataset classes first.
inline std::vector<std::vector<std::size_t>> oracle_counts(const DecisionTree& t, const Dataset& d,
                                                           std::vector<std::string>& classes) {
  classes = d.classes;
  for (const auto& l : t.leaf_classes()) {
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
  }
  auto idx = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(classes.begin(), classes.end(), s) - classes.begin());
  };
  std::vector<std::vector<std::size_t>> m(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  for (const auto& c : d.cases) ++m[idx(c.label)][idx(walk(t, d, c))];
  return m;
}

inline double round_to(double v, int decimals) {
  const double k = std::pow(10.0, decimals);
  return std::round(v * k) / k;
}

/// Random binary tree over attrs a0..a{n-1}. Thresholds have four decimals and
/// purities two, so the canonical text form carries them exactly.
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  DecisionTree tree(std::size_t attrs, std::size_t max_depth, std::size_t classes) {
    DecisionTree t;
    for (std::size_t a = 0; a < attrs; ++a) t.attribute_names.push_back("a" + std::to_string(a));
    classes_ = classes;
    t.root = grow(t, 0, max_depth);
    return t;
  }

  std::mt19937_64& rng() { return rng_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

 private:
  NodeId grow(DecisionTree& t, std::size_t depth, std::size_t max_depth) {
    const NodeId id = t.next_id();
    const bool leaf = depth == max_depth || (depth > 0 && index(3) == 0);
    if (leaf) {
      t.nodes[id] = TreeNode::make_leaf(id, "c" + std::to_string(index(classes_)), index(500),
                                        round_to(uniform(0.0, 100.0), 2));
      return id;
    }
    t.nodes[id] = TreeNode::make_split(id, index(t.attribute_names.size()),
                                       round_to(uniform(-50.0, 50.0), 4), 0, 0);
    const NodeId l = grow(t, depth + 1, max_depth);
    const NodeId r = grow(t, depth + 1, max_depth);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
  }

  std::mt19937_64 rng_;
  std::size_t classes_ = 2;
};

/// Random dataset matching a TreeGen tree's attributes, values in [-60, 60]
/// on a 0.5 grid so some cases land on thresholds.
inline Dataset random_dataset(TreeGen& g, std::size_t attrs, std::size_t n, std::size_t classes) {
  std::ostringstream csv;
  for (std::size_t a = 0; a < attrs; ++a) csv << "a" << a << ",";
  csv << "class\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < attrs; ++a) csv << std::round(g.uniform(-60.0, 60.0) * 2.0) / 2.0 << ",";
    csv << "c" << g.index(classes) << "\n";
  }
  std::istringstream in(csv.str());
  return parse_csv(in, "random");
}

}  // namespace treeglc::testing
