#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "treeglc/dataset.hpp"
#include "treeglc/layout_spc.hpp"
#include "treeglc/tree.hpp"

namespace treeglc {

/// Where a tree's metrics come from: a stored dataset, optionally split.
struct TreeMeta {
  std::optional<std::string> dataset;
  std::optional<double> fraction;  // train fraction; absent = no split
  std::uint64_t seed = 0;
  ImputeStrategy impute = ImputeStrategy::column_mean_rounded;
};

struct DataParts {
  Dataset all;
  Dataset train;  // equals all when there is no split
  Dataset test;   // empty when there is no split
  bool split = false;
};

/// On-disk layout:
///   datasets/<name>.csv
///   trees/<id>/v<k>.json   immutable, k = 1, 2, ...
///   trees/<id>/meta.json
///   trees/<id>/regions.json
/// Files are written to a temporary name and renamed into place.
class Project {
 public:
  explicit Project(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  std::vector<std::string> dataset_names() const;
  /// Throws Error(conflict) when the name is taken.
  void add_dataset(const std::string& name, const Dataset& d);
  /// As stored, missing cells included. Throws Error(not_found).
  Dataset raw_dataset(const std::string& name) const;
  Dataset dataset(const std::string& name, ImputeStrategy impute) const;

  std::vector<std::string> tree_ids() const;
  /// Picks "t<n>" when id is empty. Returns the id.
  std::string create_tree(const DecisionTree& t, const TreeMeta& meta, std::string id = {});
  std::size_t latest_version(const std::string& id) const;
  DecisionTree tree(const std::string& id, std::optional<std::size_t> version = {}) const;
  /// Stored bytes of one version.
  std::string tree_text(const std::string& id, std::optional<std::size_t> version = {}) const;
  TreeMeta meta(const std::string& id) const;

  /// Appends version latest+1. With expected set, throws Error(conflict)
  /// unless it equals the latest version. Serialized per tree id.
  std::size_t append_version(const std::string& id, const DecisionTree& t,
                             std::optional<std::size_t> expected = {});

  /// Runs f(latest tree, latest version) under the tree's writer lock and
  /// stores the tree it returns as the next version.
  template <typename F>
  std::size_t mutate(const std::string& id, std::optional<std::size_t> expected, F&& f) {
    std::lock_guard lock(tree_lock(id));
    const std::size_t latest = latest_version(id);
    check_expected(id, latest, expected);
    DecisionTree next = f(tree(id, latest), latest);
    return store_version(id, latest + 1, next);
  }

  std::vector<RegionRule> regions(const std::string& id) const;
  void set_regions(const std::string& id, const std::vector<RegionRule>& rules);

  /// Data for a tree, with optional overrides of the stored metadata.
  DataParts data_for(const std::string& id, std::optional<std::string> dataset = {},
                     std::optional<double> fraction = {},
                     std::optional<std::uint64_t> seed = {}) const;

 private:
  std::filesystem::path tree_dir(const std::string& id) const;
  std::mutex& tree_lock(const std::string& id);
  void check_expected(const std::string& id, std::size_t latest,
                      std::optional<std::size_t> expected) const;
  std::size_t store_version(const std::string& id, std::size_t version, const DecisionTree& t);

  std::filesystem::path dir_;
  mutable std::mutex mu_;  // guards the maps below and id allocation
  std::map<std::string, std::unique_ptr<std::mutex>> tree_locks_;
  mutable std::map<std::string, std::shared_ptr<const Dataset>> dataset_cache_;
};

/// Writes content to path through a sibling temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Letters, digits, '_' and '-', 1 to 64 characters.
bool valid_name(std::string_view s);

}  // namespace treeglc
