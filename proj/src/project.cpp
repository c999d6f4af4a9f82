#include "treeglc/project.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "treeglc/error.hpp"
#include "treeglc/json_io.hpp"

namespace fs = std::filesystem;

namespace treeglc {

bool valid_name(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  });
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::io_error, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io_error, "cannot rename into " + path.string());
  }
}

namespace {

const CsvOptions kStoredCsv{"class", "?"};

Json meta_json(const TreeMeta& m) {
  return {{"dataset", m.dataset ? Json(*m.dataset) : Json(nullptr)},
          {"fraction", m.fraction ? Json(*m.fraction) : Json(nullptr)},
          {"seed", m.seed},
          {"impute", std::string(to_string(m.impute))}};
}

TreeMeta meta_from_json(const Json& j) {
  TreeMeta m;
  if (j.contains("dataset") && j["dataset"].is_string()) m.dataset = j["dataset"].get<std::string>();
  if (j.contains("fraction") && j["fraction"].is_number()) m.fraction = j["fraction"].get<double>();
  if (j.contains("seed") && j["seed"].is_number_unsigned()) m.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("impute") && j["impute"].is_string()) {
    m.impute = parse_impute_strategy(j["impute"].get<std::string>())
                   .value_or(ImputeStrategy::column_mean_rounded);
  }
  return m;
}

}  // namespace

Project::Project(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "datasets", ec);
  fs::create_directories(dir_ / "trees", ec);
  if (!fs::is_directory(dir_ / "datasets") || !fs::is_directory(dir_ / "trees")) {
    throw Error(ErrorCode::io_error, "cannot create project at " + dir_.string());
  }
}

std::vector<std::string> Project::dataset_names() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir_ / "datasets")) {
    if (e.path().extension() == ".csv") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Project::add_dataset(const std::string& name, const Dataset& d) {
  if (!valid_name(name)) throw FieldError("name", "dataset names use letters, digits, '_' and '-'");
  if (d.attribute_index(kStoredCsv.class_column)) {
    throw Error(ErrorCode::invalid_argument, "an attribute may not be named 'class'");
  }
  std::lock_guard lock(mu_);
  const auto path = dir_ / "datasets" / (name + ".csv");
  if (fs::exists(path)) throw Error(ErrorCode::conflict, "dataset '" + name + "' already exists");
  write_file_atomic(path, to_csv(d, kStoredCsv));
}

Dataset Project::raw_dataset(const std::string& name) const {
  if (!valid_name(name)) throw Error(ErrorCode::not_found, "unknown dataset '" + name + "'");
  std::lock_guard lock(mu_);
  auto it = dataset_cache_.find(name);
  if (it != dataset_cache_.end()) return *it->second;
  const auto path = dir_ / "datasets" / (name + ".csv");
  if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown dataset '" + name + "'");
  auto d = std::make_shared<const Dataset>(load_csv(path, kStoredCsv));
  dataset_cache_[name] = d;
  return *d;
}

Dataset Project::dataset(const std::string& name, ImputeStrategy impute) const {
  return impute_missing(raw_dataset(name), impute);
}

fs::path Project::tree_dir(const std::string& id) const {
  if (!valid_name(id)) throw Error(ErrorCode::not_found, "unknown tree '" + id + "'");
  const auto p = dir_ / "trees" / id;
  if (!fs::is_directory(p)) throw Error(ErrorCode::not_found, "unknown tree '" + id + "'");
  return p;
}

std::vector<std::string> Project::tree_ids() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir_ / "trees")) {
    if (e.is_directory() && fs::exists(e.path() / "v1.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Project::create_tree(const DecisionTree& t, const TreeMeta& meta, std::string id) {
  t.validate();
  if (meta.dataset) raw_dataset(*meta.dataset);
  if (meta.fraction && !(*meta.fraction > 0.0 && *meta.fraction < 1.0)) {
    throw FieldError("fraction", "must lie in (0, 1)");
  }
  std::lock_guard lock(mu_);
  if (id.empty()) {
    for (std::size_t n = 1;; ++n) {
      id = "t" + std::to_string(n);
      if (!fs::exists(dir_ / "trees" / id)) break;
    }
  } else if (!valid_name(id)) {
    throw FieldError("id", "tree ids use letters, digits, '_' and '-'");
  }
  const auto d = dir_ / "trees" / id;
  if (fs::exists(d)) throw Error(ErrorCode::conflict, "tree '" + id + "' already exists");
  fs::create_directories(d);
  write_file_atomic(d / "meta.json", dump(meta_json(meta)));
  write_file_atomic(d / "v1.json", dump(to_json(t)));
  return id;
}

std::size_t Project::latest_version(const std::string& id) const {
  const auto d = tree_dir(id);
  std::size_t v = 0;
  while (fs::exists(d / ("v" + std::to_string(v + 1) + ".json"))) ++v;
  if (v == 0) throw Error(ErrorCode::not_found, "tree '" + id + "' has no versions");
  return v;
}

std::string Project::tree_text(const std::string& id, std::optional<std::size_t> version) const {
  const auto d = tree_dir(id);
  const std::size_t v = version ? *version : latest_version(id);
  const auto path = d / ("v" + std::to_string(v) + ".json");
  if (v == 0 || !fs::exists(path)) {
    throw Error(ErrorCode::not_found, "tree '" + id + "' has no version " + std::to_string(v));
  }
  return read_file(path);
}

DecisionTree Project::tree(const std::string& id, std::optional<std::size_t> version) const {
  return tree_from_json(parse_json(tree_text(id, version)));
}

TreeMeta Project::meta(const std::string& id) const {
  return meta_from_json(parse_json(read_file(tree_dir(id) / "meta.json")));
}

std::mutex& Project::tree_lock(const std::string& id) {
  tree_dir(id);
  std::lock_guard lock(mu_);
  auto& slot = tree_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void Project::check_expected(const std::string& id, std::size_t latest,
                             std::optional<std::size_t> expected) const {
  if (expected && *expected != latest) {
    throw Error(ErrorCode::conflict, "tree '" + id + "' is at version " + std::to_string(latest) +
                                         ", not " + std::to_string(*expected));
  }
}

std::size_t Project::store_version(const std::string& id, std::size_t version,
                                   const DecisionTree& t) {
  t.validate();
  write_file_atomic(tree_dir(id) / ("v" + std::to_string(version) + ".json"), dump(to_json(t)));
  return version;
}

std::size_t Project::append_version(const std::string& id, const DecisionTree& t,
                                    std::optional<std::size_t> expected) {
  return mutate(id, expected, [&](const DecisionTree&, std::size_t) { return t; });
}

std::vector<RegionRule> Project::regions(const std::string& id) const {
  const auto path = tree_dir(id) / "regions.json";
  if (!fs::exists(path)) return {};
  return rules_from_json(parse_json(read_file(path)));
}

void Project::set_regions(const std::string& id, const std::vector<RegionRule>& rules) {
  std::lock_guard lock(tree_lock(id));
  write_file_atomic(tree_dir(id) / "regions.json", dump(to_json(rules)));
}

DataParts Project::data_for(const std::string& id, std::optional<std::string> dataset,
                            std::optional<double> fraction, std::optional<std::uint64_t> seed) const {
  const auto m = meta(id);
  const auto name = dataset ? dataset : m.dataset;
  if (!name) throw Error(ErrorCode::schema_mismatch, "tree '" + id + "' has no dataset attached");
  DataParts parts;
  parts.all = this->dataset(*name, m.impute);
  const auto f = fraction ? fraction : m.fraction;
  if (f) {
    SplitSpec spec;
    spec.train_fraction = *f;
    spec.seed = seed ? *seed : m.seed;
    auto [train, test] = split_train_test(parts.all, spec);
    parts.train = std::move(train);
    parts.test = std::move(test);
    parts.split = true;
  } else {
    parts.train = parts.all;
    parts.test = subset(parts.all, {});
  }
  return parts;
}

}  // namespace treeglc
