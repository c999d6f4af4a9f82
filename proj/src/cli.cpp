#include "treeglc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>

#include "treeglc/error.hpp"
#include "treeglc/geometry.hpp"
#include "treeglc/http_service.hpp"
#include "treeglc/induction.hpp"
#include "treeglc/json_io.hpp"
#include "treeglc/layout_bc.hpp"
#include "treeglc/layout_spc.hpp"
#include "treeglc/project.hpp"
#include "treeglc/render_svg.hpp"
#include "treeglc/tree_text.hpp"

namespace treeglc {

namespace {

struct DataArgs {
  std::string path;
  std::string class_column = "class";
  std::string missing = "?";
  std::string impute = "column_mean_rounded";
  std::optional<double> fraction;
  std::uint64_t seed = 0;
  std::string part = "all";  // --split

  void add(CLI::App* c, bool required) {
    auto* o = c->add_option("-d,--data", path, "CSV file");
    if (required) o->required();
    c->add_option("--class", class_column, "class column name");
    c->add_option("--missing", missing, "missing value token");
    c->add_option("--impute", impute, "column_mean_rounded, column_median or drop_rows");
  }

  void add_split(CLI::App* c) {
    c->add_option("--fraction", fraction, "train fraction for a seeded split");
    c->add_option("--seed", seed, "split seed");
    c->add_option("--split", part, "all, train or test");
  }

  Dataset load() const {
    auto strategy = parse_impute_strategy(impute);
    if (!strategy) throw FieldError("impute", "unknown strategy '" + impute + "'");
    return impute_missing(load_csv(path, CsvOptions{class_column, missing}), *strategy);
  }

  /// The requested part of the loaded data.
  Dataset selected() const {
    Dataset d = load();
    if (!fraction) {
      if (part != "all" && part != "train") throw FieldError("split", "a test split needs --fraction");
      return d;
    }
    auto [train, test] = split_train_test(d, SplitSpec{*fraction, seed, true});
    if (part == "all") return d;
    if (part == "train") return train;
    if (part == "test") return test;
    throw FieldError("split", "expected all, train or test");
  }
};

/// Reads a tree stored as JSON or as indented text.
DecisionTree load_tree(const std::string& path, bool aliases) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return tree_from_json(parse_json(text));
  TreeTextOptions opts;
  if (aliases) opts.aliases = default_aliases();
  return parse_tree_text(text, opts);
}

void emit(std::ostream& out, const std::string& output, const std::string& content) {
  if (output.empty() || output == "-") {
    out << content;
  } else {
    write_file_atomic(output, content);
  }
}

std::size_t attribute_arg(const Dataset& d, const std::string& s, const std::string& field) {
  if (auto i = d.attribute_index(s)) return *i;
  if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const auto i = std::stoul(s);
    if (i < d.attributes.size()) return i;
  }
  throw FieldError(field, "unknown attribute '" + s + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision tree layouts and editing"};
  app.require_subcommand(1);
  std::string output;
  bool no_aliases = false;

  DataArgs data;
  InductionParams params;
  std::string criterion = "entropy";
  std::string tree_path, text_path, scene_path, other_path;
  std::string mode = "spc", scale = "uniform", style = "sharp", condense;
  bool density = false, with_cases = false;
  std::string attrs, objective, aliases_path;
  NodeId node = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string project_dir;
  if (const char* env = std::getenv("TREEGLC_PROJECT")) project_dir = env;

  auto add_output = [&](CLI::App* c) { c->add_option("-o,--out", output, "output file, '-' for stdout"); };
  auto add_tree = [&](CLI::App* c) {
    c->add_option("-t,--tree", tree_path, "tree as JSON or text")->required()->check(CLI::ExistingFile);
    c->add_flag("--no-aliases", no_aliases, "do not map the default attribute aliases");
  };

  auto* train_cmd = app.add_subcommand("train", "grow a tree from a CSV file");
  data.add(train_cmd, true);
  train_cmd->add_option("--fraction", data.fraction, "train on this seeded fraction");
  train_cmd->add_option("--seed", data.seed, "split seed");
  train_cmd->add_option("--criterion", criterion, "entropy or gini");
  train_cmd->add_option("--min-leaf", params.min_samples_leaf, "minimum cases per leaf");
  train_cmd->add_option("--max-depth", params.max_depth, "maximum depth");
  train_cmd->add_option("--min-purity", params.min_purity_stop, "stop splitting at this purity (percent)");
  add_output(train_cmd);

  auto* parse_cmd = app.add_subcommand("parse", "convert an indented text tree to JSON");
  parse_cmd->add_option("-i,--in,file", text_path, "text tree")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--aliases", aliases_path, "JSON object of extra name aliases")
      ->check(CLI::ExistingFile);
  parse_cmd->add_flag("--no-aliases", no_aliases, "do not map the default attribute aliases");
  add_output(parse_cmd);

  auto* print_cmd = app.add_subcommand("print", "print a tree as indented text");
  print_cmd->add_option("-i,--in,file", tree_path, "tree as JSON or text")->required()->check(CLI::ExistingFile);
  print_cmd->add_flag("--no-aliases", no_aliases, "do not map the default attribute aliases");
  add_output(print_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "confusion matrix of a tree on a CSV file");
  add_tree(eval_cmd);
  data.add(eval_cmd, true);
  data.add_split(eval_cmd);
  add_output(eval_cmd);

  auto* layout_cmd = app.add_subcommand("layout", "compute a scene as JSON");
  add_tree(layout_cmd);
  data.add(layout_cmd, false);
  data.add_split(layout_cmd);
  layout_cmd->add_option("--mode", mode, "bc or spc")->check(CLI::IsMember({"bc", "spc"}));
  layout_cmd->add_option("--scale", scale, "uniform or proportional");
  layout_cmd->add_option("--style", style, "sharp or smooth");
  layout_cmd->add_option("--condense", condense, "per_zone_center or per_zone_per_class");
  layout_cmd->add_flag("--density", density, "shade zones by case count");
  layout_cmd->add_flag("--cases", with_cases, "overlay the cases of --data");
  add_output(layout_cmd);

  auto* render_cmd = app.add_subcommand("render", "render a scene JSON file to SVG");
  render_cmd->add_option("-s,--scene,scene", scene_path, "scene JSON")->required()->check(CLI::ExistingFile);
  data.add(render_cmd, false);
  data.add_split(render_cmd);
  auto* condense_opt = render_cmd->add_option("--condense", condense, "per_zone_per_class (default) or per_zone_center")
      ->expected(0, 1);
  render_cmd->add_flag("--density", density, "shade zones by case count");
  render_cmd->add_option("--side-by-side", other_path, "second scene for a two-panel figure")
      ->check(CLI::ExistingFile);
  add_output(render_cmd);

  auto* pair_cmd = app.add_subcommand("pairsplit", "best joint split on two attributes");
  data.add(pair_cmd, true);
  pair_cmd->add_option("--attrs", attrs, "two attributes as names or 0-based indices, i,j")->required();
  pair_cmd->add_option("--objective", objective, "pure_count, area_proxy or gini_quadrants");
  add_output(pair_cmd);

  auto* overgen_cmd = app.add_subcommand("overgen", "rule intervals against data ranges per leaf");
  add_tree(overgen_cmd);
  data.add(overgen_cmd, true);
  data.add_split(overgen_cmd);
  add_output(overgen_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "metrics across thresholds of one node");
  add_tree(sweep_cmd);
  data.add(sweep_cmd, true);
  data.add_split(sweep_cmd);
  sweep_cmd->add_option("--node", node, "internal node id")->required();
  sweep_cmd->add_option("--objective", objective, "accuracy, fn:CLASS or recall:CLASS");
  add_output(sweep_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "serve a project directory over HTTP");
  serve_cmd->add_option("--project", project_dir, "project directory (default $TREEGLC_PROJECT)");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) {
      if (criterion == "entropy" || criterion == "entropy_gain") {
        params.criterion = SplitCriterion::entropy_gain;
      } else if (criterion == "gini") {
        params.criterion = SplitCriterion::gini;
      } else {
        throw FieldError("criterion", "expected entropy or gini");
      }
      data.part = "train";
      emit(out, output, dump(to_json(train(data.selected(), params))));
    } else if (parse_cmd->parsed()) {
      TreeTextOptions opts;
      if (!no_aliases) opts.aliases = default_aliases();
      if (!aliases_path.empty()) {
        const Json extra = parse_json(read_file(aliases_path));
        if (!extra.is_object()) throw FieldError("aliases", "expected a JSON object");
        for (const auto& [k, v] : extra.items()) {
          if (!v.is_string()) throw FieldError("aliases." + k, "expected a string");
          opts.aliases[k] = v.get<std::string>();
        }
      }
      emit(out, output, dump(to_json(parse_tree_text(read_file(text_path), opts))));
    } else if (print_cmd->parsed()) {
      emit(out, output, serialize_tree_text(load_tree(tree_path, !no_aliases)));
    } else if (eval_cmd->parsed()) {
      emit(out, output, dump(to_json(evaluate(load_tree(tree_path, !no_aliases), data.selected()))));
    } else if (layout_cmd->parsed()) {
      const auto t = load_tree(tree_path, !no_aliases);
      std::optional<Dataset> d;
      if (!data.path.empty()) d = data.selected();
      if (with_cases && !d) throw FieldError("data", "--cases needs --data");
      const auto ranges = d ? attribute_ranges(t, *d) : threshold_ranges(t);
      Json spec{{"kind", mode}, {"tree", to_json(t)}};
      Json rj = Json::array();
      for (const auto& r : ranges) rj.push_back(to_json(r));
      spec["ranges"] = rj;
      if (mode == "bc") spec["options"] = Json{{"scale", scale}, {"style", style}};
      if (!condense.empty()) spec["condensed"] = condense;
      if (density) spec["density"] = true;
      Scene scene = scene_from_json(spec);
      if (with_cases) {
        if (auto* bc = std::get_if<BcScene>(&scene)) {
          scene = overlay_cases(std::move(*bc), *d);
        } else {
          scene = overlay_cases(std::move(std::get<SpcScene>(scene)), *d);
        }
      }
      emit(out, output, dump(to_json(scene)));
    } else if (render_cmd->parsed()) {
      auto load_scene = [&](const std::string& path) {
        Json spec = parse_json(read_file(path));
        if (spec.is_object() && spec.value("kind", "") == "spc") {
          if (condense_opt->count() > 0) spec["condensed"] = condense.empty() ? "per_zone_per_class" : condense;
          if (density) spec["density"] = true;
        }
        Scene scene = scene_from_json(spec);
        if (data.path.empty()) return scene;
        const Dataset d = data.selected();
        if (auto* bc = std::get_if<BcScene>(&scene)) return Scene(overlay_cases(std::move(*bc), d));
        return Scene(overlay_cases(std::move(std::get<SpcScene>(scene)), d));
      };
      const Scene left = load_scene(scene_path);
      if (other_path.empty()) {
        emit(out, output, render(left));
      } else {
        emit(out, output, render_side_by_side(left, load_scene(other_path)));
      }
    } else if (pair_cmd->parsed()) {
      const Dataset d = data.load();
      const auto comma = attrs.find(',');
      if (comma == std::string::npos) throw FieldError("attrs", "expected two attributes as i,j");
      const auto i = attribute_arg(d, attrs.substr(0, comma), "attrs");
      const auto j = attribute_arg(d, attrs.substr(comma + 1), "attrs");
      PairObjective obj = PairObjective::pure_count;
      if (!objective.empty()) {
        auto o = parse_pair_objective(objective);
        if (!o) throw FieldError("objective", "expected pure_count, area_proxy or gini_quadrants");
        obj = *o;
      }
      Json res = to_json(pair_split_search(pair_cases(d, i, j), d.classes.size(), obj), d.classes);
      res["attr_i"] = d.attributes[i].name;
      res["attr_j"] = d.attributes[j].name;
      emit(out, output, dump(res));
    } else if (overgen_cmd->parsed()) {
      const auto t = load_tree(tree_path, !no_aliases);
      Json res = to_json(overgeneralize_report(t, data.selected()));
      res["attribute_names"] = t.attribute_names;
      emit(out, output, dump(res));
    } else if (sweep_cmd->parsed()) {
      SweepObjective obj;
      if (!objective.empty()) {
        auto o = SweepObjective::parse(objective);
        if (!o) throw FieldError("objective", "expected accuracy, fn:CLASS or recall:CLASS");
        obj = *o;
      }
      const auto sweep = threshold_sweep(load_tree(tree_path, !no_aliases), node, data.selected(), obj);
      Json points = Json::array();
      for (const auto& p : sweep) points.push_back(to_json(p));
      const auto best = best_sweep_point(sweep, obj);
      emit(out, output,
           dump(Json{{"node", node},
                     {"objective", obj.to_string()},
                     {"points", points},
                     {"best", best ? to_json(*best) : Json(nullptr)}}));
    } else if (serve_cmd->parsed()) {
      if (project_dir.empty()) throw FieldError("project", "pass --project or set TREEGLC_PROJECT");
      Project project(project_dir);
      err << "serving " << project_dir << " on http://" << host << ":" << port << "\n";
      serve(project, host, port);
    }
  } catch (const Error& e) {
    err << "error " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace treeglc
