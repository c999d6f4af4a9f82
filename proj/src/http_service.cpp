#include "treeglc/http_service.hpp"

#include <charconv>
#include <sstream>

#include <httplib.h>

#include "treeglc/error.hpp"
#include "treeglc/induction.hpp"
#include "treeglc/json_io.hpp"
#include "treeglc/layout_bc.hpp"
#include "treeglc/layout_spc.hpp"
#include "treeglc/tree_text.hpp"

namespace treeglc {

namespace {

using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return 422;
    case ErrorCode::parse_error: return 400;
    case ErrorCode::schema_mismatch: return 422;
    case ErrorCode::not_found: return 404;
    case ErrorCode::out_of_range: return 422;
    case ErrorCode::conflict: return 409;
    case ErrorCode::io_error: return 500;
  }
  return 500;
}

void send_error(Response& res, int status, std::string_view code, const std::string& message,
                const std::optional<std::string>& field) {
  Json e{{"code", std::string(code)}, {"message", message}};
  e["field"] = field ? Json(*field) : Json(nullptr);
  res.status = status;
  res.set_content(dump(Json{{"error", e}}), kJson);
}

void send(Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(dump(body), kJson);
}

template <typename F>
auto guarded(F f) {
  return [f](const Request& req, Response& res) {
    try {
      f(req, res);
    } catch (const FieldError& e) {
      send_error(res, 400, to_string(e.code()), e.what(), e.field());
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what(), std::nullopt);
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what(), std::nullopt);
    }
  };
}

Json body_json(const Request& req) {
  if (req.body.empty()) return Json::object();
  return parse_json(req.body);
}

std::optional<std::string> param(const Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

template <typename T>
T parse_number(const std::string& s, const std::string& field) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw FieldError(field, "not a number");
  return v;
}

template <typename T>
std::optional<T> number_param(const Request& req, const char* name) {
  auto v = param(req, name);
  if (!v) return std::nullopt;
  return parse_number<T>(*v, name);
}

bool flag_param(const Request& req, const char* name) {
  auto v = param(req, name);
  return v && (*v == "1" || *v == "true" || *v == "yes");
}

std::optional<std::size_t> if_match(const Request& req) {
  if (!req.has_header("If-Match")) return std::nullopt;
  std::string v = req.get_header_value("If-Match");
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return parse_number<std::size_t>(v, "If-Match");
}

const Json& need(const Json& j, const char* key) {
  if (!j.is_object()) throw FieldError("$", "expected an object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw FieldError(key, "missing");
  return *it;
}

double need_number(const Json& j, const char* key) {
  const auto& v = need(j, key);
  if (!v.is_number()) throw FieldError(key, "expected a number");
  return v.get<double>();
}

std::string need_string(const Json& j, const char* key) {
  const auto& v = need(j, key);
  if (!v.is_string()) throw FieldError(key, "expected a string");
  return v.get<std::string>();
}

/// Accepts a dataset attribute name or its 0-based index.
std::size_t attribute_ref(const Dataset& d, const Json& v, const char* field) {
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= d.attributes.size()) {
      throw FieldError(field, "attribute index out of range");
    }
    return static_cast<std::size_t>(i);
  }
  if (v.is_string()) {
    auto i = d.attribute_index(v.get<std::string>());
    if (!i) throw FieldError(field, "unknown attribute");
    return *i;
  }
  throw FieldError(field, "expected an attribute name or index");
}

Json metrics_or_null(const DecisionTree& t, const Dataset& d, bool present) {
  return present ? to_json(evaluate(t, d)) : Json(nullptr);
}

}  // namespace

struct ServiceRoutes {
  Service& svc;
  Project& p;

  Json summary(const std::string& name, const Dataset& d) {
    Json attrs = Json::array();
    for (const auto& a : d.attributes) attrs.push_back(a.name);
    return {{"name", name}, {"cases", d.cases.size()}, {"attributes", attrs}, {"classes", d.classes}};
  }

  std::optional<std::size_t> version_param(const Request& req) {
    return number_param<std::size_t>(req, "version");
  }

  DataParts parts(const std::string& id, const Request& req) {
    return p.data_for(id, param(req, "dataset"), number_param<double>(req, "fraction"),
                      number_param<std::uint64_t>(req, "seed"));
  }

  const Dataset& part_of(const DataParts& d, const std::optional<std::string>& part,
                         const char* fallback) {
    const std::string which = part.value_or(fallback);
    if (which == "all") return d.all;
    if (which == "train") return d.train;
    if (which == "test") return d.test;
    throw FieldError("part", "expected all, train or test");
  }

  Json mutation_response(const std::string& id, std::size_t version) {
    const auto t = p.tree(id, version);
    Json out{{"id", id}, {"new_version", version}, {"tree", to_json(t)}};
    if (p.meta(id).dataset) {
      const auto d = p.data_for(id);
      out["metrics_train"] = to_json(evaluate(t, d.train));
      out["metrics_test"] = metrics_or_null(t, d.test, d.split);
    } else {
      out["metrics_train"] = nullptr;
      out["metrics_test"] = nullptr;
    }
    return out;
  }

  std::vector<Interval> ranges_for(const std::string& id, const DecisionTree& t,
                                   const std::optional<std::string>& dataset) {
    const auto name = dataset ? dataset : p.meta(id).dataset;
    if (!name) return threshold_ranges(t);
    return attribute_ranges(t, p.dataset(*name, p.meta(id).impute));
  }

  // Layout request fields mirror the scene JSON: kind, options, plots,
  // condensed, density. Overlay data is chosen by dataset and part.
  Json layout(const std::string& id, const Json& request, const std::optional<std::size_t>& version,
              const std::optional<std::string>& dataset, const std::optional<std::string>& part) {
    const auto v = version ? *version : p.latest_version(id);
    const std::string key = id + "@" + std::to_string(v) + "|" + request.dump() + "|" +
                            dataset.value_or("") + "|" + part.value_or("");
    {
      std::lock_guard lock(svc.cache_mu_);
      auto it = svc.scene_cache_.find(key);
      if (it != svc.scene_cache_.end()) return parse_json(it->second);
    }
    const auto t = p.tree(id, v);
    Json spec = request;
    spec["tree"] = to_json(t);
    Json ranges = Json::array();
    for (const auto& r : ranges_for(id, t, dataset)) ranges.push_back(to_json(r));
    spec["ranges"] = ranges;
    Scene scene = scene_from_json(spec);
    if (dataset || part) {
      const auto d = p.data_for(id, dataset);
      const auto& cases = part_of(d, part, "all");
      if (auto* bc = std::get_if<BcScene>(&scene)) {
        scene = overlay_cases(std::move(*bc), cases);
      } else {
        scene = overlay_cases(std::move(std::get<SpcScene>(scene)), cases);
      }
    }
    Json out = to_json(scene);
    out["id"] = id;
    out["version"] = v;
    std::lock_guard lock(svc.cache_mu_);
    svc.scene_cache_[key] = out.dump();
    return out;
  }

  SpcScene spc_for(const std::string& id, const DecisionTree& t) {
    return build_spc(t, ranges_for(id, t, std::nullopt));
  }

  void mount(httplib::Server& s) {
    s.Get("/datasets", guarded([this](const Request&, Response& res) {
      Json out = Json::array();
      for (const auto& name : p.dataset_names()) out.push_back(summary(name, p.raw_dataset(name)));
      send(res, out);
    }));

    s.Post("/datasets", guarded([this](const Request& req, Response& res) {
      const auto name = param(req, "name");
      if (!name) throw FieldError("name", "missing");
      CsvOptions opts;
      if (auto c = param(req, "class")) opts.class_column = *c;
      if (auto m = param(req, "missing")) opts.missing_token = *m;
      std::istringstream in(req.body);
      const Dataset d = parse_csv(in, *name, opts);
      p.add_dataset(*name, d);
      send(res, summary(*name, p.raw_dataset(*name)), 201);
    }));

    s.Get(R"(/datasets/([A-Za-z0-9_-]+))", guarded([this](const Request& req, Response& res) {
      send(res, to_json(p.raw_dataset(req.matches[1])));
    }));

    s.Post("/trees", guarded([this](const Request& req, Response& res) {
      const Json body = body_json(req);
      if (!body.is_object()) throw FieldError("$", "expected an object");
      TreeMeta meta;
      if (body.contains("dataset") && !body["dataset"].is_null()) meta.dataset = need_string(body, "dataset");
      if (body.contains("fraction") && !body["fraction"].is_null()) meta.fraction = need_number(body, "fraction");
      if (body.contains("seed")) {
        if (!body["seed"].is_number_unsigned()) throw FieldError("seed", "expected a non-negative integer");
        meta.seed = body["seed"].get<std::uint64_t>();
      }
      if (body.contains("impute")) {
        auto s = parse_impute_strategy(need_string(body, "impute"));
        if (!s) throw FieldError("impute", "unknown strategy");
        meta.impute = *s;
      }
      if (meta.fraction && !(*meta.fraction > 0.0 && *meta.fraction < 1.0)) {
        throw FieldError("fraction", "must lie in (0, 1)");
      }
      std::string id;
      if (body.contains("id")) id = need_string(body, "id");

      DecisionTree t;
      if (body.contains("train")) {
        const auto& tr = body["train"];
        if (!tr.is_object()) throw FieldError("train", "expected an object");
        if (!meta.dataset) throw FieldError("dataset", "training needs a dataset");
        InductionParams params;
        if (tr.contains("criterion")) {
          const auto c = tr["criterion"].is_string() ? tr["criterion"].get<std::string>() : "";
          if (c == "entropy" || c == "entropy_gain") {
            params.criterion = SplitCriterion::entropy_gain;
          } else if (c == "gini") {
            params.criterion = SplitCriterion::gini;
          } else {
            throw FieldError("train.criterion", "expected entropy or gini");
          }
        }
        auto count = [&](const char* key, std::size_t& out) {
          if (!tr.contains(key)) return;
          if (!tr[key].is_number_unsigned()) throw FieldError(std::string("train.") + key, "expected a positive integer");
          out = tr[key].get<std::size_t>();
        };
        count("min_leaf", params.min_samples_leaf);
        count("max_depth", params.max_depth);
        if (tr.contains("min_purity")) {
          if (!tr["min_purity"].is_number()) throw FieldError("train.min_purity", "expected a number");
          params.min_purity_stop = tr["min_purity"].get<double>();
        }
        DataParts d;
        {
          // same split as data_for
          d.all = p.dataset(*meta.dataset, meta.impute);
          d.train = d.all;
          if (meta.fraction) {
            SplitSpec spec{*meta.fraction, meta.seed, true};
            d.train = split_train_test(d.all, spec).first;
          }
        }
        t = train(d.train, params);
      } else if (body.contains("parse")) {
        const auto& pr = body["parse"];
        if (!pr.is_object()) throw FieldError("parse", "expected an object");
        TreeTextOptions opts;
        if (!pr.contains("default_aliases") || pr["default_aliases"] == true) opts.aliases = default_aliases();
        if (pr.contains("aliases")) {
          if (!pr["aliases"].is_object()) throw FieldError("parse.aliases", "expected an object");
          for (const auto& [k, v] : pr["aliases"].items()) {
            if (!v.is_string()) throw FieldError("parse.aliases." + k, "expected a string");
            opts.aliases[k] = v.get<std::string>();
          }
        }
        if (!pr.contains("text") || !pr["text"].is_string()) throw FieldError("parse.text", "expected a string");
        t = parse_tree_text(pr["text"].get<std::string>(), opts);
      } else if (body.contains("tree")) {
        t = tree_from_json(body["tree"]);
      } else {
        throw FieldError("train", "one of train, parse or tree is required");
      }
      if (meta.dataset) bind_attributes(t, p.dataset(*meta.dataset, meta.impute));
      const auto new_id = p.create_tree(t, meta, id);
      Json out = mutation_response(new_id, 1);
      out["version"] = 1;
      send(res, out, 201);
    }));

    s.Get("/trees", guarded([this](const Request&, Response& res) {
      Json out = Json::array();
      for (const auto& id : p.tree_ids()) {
        const auto m = p.meta(id);
        out.push_back({{"id", id},
                       {"version", p.latest_version(id)},
                       {"dataset", m.dataset ? Json(*m.dataset) : Json(nullptr)}});
      }
      send(res, out);
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)(?:@(\d+))?)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      std::optional<std::size_t> v;
      if (req.matches[2].matched) v = parse_number<std::size_t>(req.matches[2], "version");
      const auto version = v ? *v : p.latest_version(id);
      res.set_header("ETag", "\"" + std::to_string(version) + "\"");
      res.set_content(p.tree_text(id, version), kJson);
    }));

    s.Patch(R"(/trees/([A-Za-z0-9_-]+)/nodes/(\d+))", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const NodeId node = parse_number<NodeId>(req.matches[2], "node");
      const Json body = body_json(req);
      const double threshold = need_number(body, "threshold");
      bool relabel = false;
      if (body.contains("relabel_leaves")) {
        if (!body["relabel_leaves"].is_boolean()) throw FieldError("relabel_leaves", "expected a boolean");
        relabel = body["relabel_leaves"].get<bool>();
      }
      const auto expected = if_match(req);
      const auto d = p.data_for(id);
      const auto v = p.mutate(id, expected, [&](const DecisionTree& t, std::size_t) {
        return set_threshold(t, node, threshold, d.train, relabel).tree;
      });
      send(res, mutation_response(id, v));
    }));

    s.Post(R"(/trees/([A-Za-z0-9_-]+)/nodes/(\d+)/split)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const NodeId leaf = parse_number<NodeId>(req.matches[2], "node");
      const Json body = body_json(req);
      const auto d = p.data_for(id);
      const std::size_t attr = attribute_ref(d.train, need(body, "attr"), "attr");
      const double threshold = need_number(body, "threshold");
      const auto v = p.mutate(id, if_match(req), [&](const DecisionTree& t, std::size_t) {
        return add_split(t, leaf, d.train.attributes[attr].name, threshold, d.train);
      });
      send(res, mutation_response(id, v));
    }));

    s.Delete(R"(/trees/([A-Za-z0-9_-]+)/nodes/(\d+))", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const NodeId node = parse_number<NodeId>(req.matches[2], "node");
      const auto d = p.data_for(id);
      const auto v = p.mutate(id, if_match(req), [&](const DecisionTree& t, std::size_t) {
        return remove_subtree(t, node, d.train);
      });
      send(res, mutation_response(id, v));
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/layout)", guarded([this](const Request& req, Response& res) {
      Json request = Json::object();
      const auto mode = param(req, "mode").value_or("spc");
      if (mode != "bc" && mode != "spc") throw FieldError("mode", "expected bc or spc");
      request["kind"] = mode;
      Json opts = Json::object();
      if (auto v = param(req, "scale")) opts["scale"] = *v;
      if (auto v = param(req, "style")) opts["style"] = *v;
      request["options"] = opts;
      if (auto c = param(req, "condense"); c && *c != "0" && *c != "false") {
        request["condensed"] = (*c == "1" || *c == "true") ? "per_zone_per_class" : *c;
      }
      if (flag_param(req, "density")) request["density"] = true;
      send(res, layout(req.matches[1], request, version_param(req), param(req, "dataset"),
                       param(req, "part")));
    }));

    s.Post(R"(/trees/([A-Za-z0-9_-]+)/layout)", guarded([this](const Request& req, Response& res) {
      Json body = body_json(req);
      if (!body.is_object()) throw FieldError("$", "expected an object");
      std::optional<std::string> dataset, part;
      std::optional<std::size_t> version;
      if (body.contains("dataset")) dataset = need_string(body, "dataset");
      if (body.contains("part")) part = need_string(body, "part");
      if (body.contains("version")) {
        if (!body["version"].is_number_unsigned()) throw FieldError("version", "expected an integer");
        version = body["version"].get<std::size_t>();
      }
      for (const char* k : {"dataset", "part", "version", "tree", "ranges"}) body.erase(k);
      if (!body.contains("kind")) body["kind"] = "spc";
      send(res, layout(req.matches[1], body, version, dataset, part));
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/metrics)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const auto v = version_param(req).value_or(p.latest_version(id));
      const auto t = p.tree(id, v);
      const auto d = parts(id, req);
      Json out{{"id", id}, {"version", v}, {"dataset", d.all.name}};
      out["all"] = to_json(evaluate(t, d.all));
      out["train"] = metrics_or_null(t, d.train, d.split);
      out["test"] = metrics_or_null(t, d.test, d.split);
      send(res, out);
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/margins)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const auto t = p.tree(id, version_param(req));
      const auto d = parts(id, req);
      send(res, Json{{"id", id}, {"nodes", to_json(margin_report(t, part_of(d, param(req, "part"), "train")))}});
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/overgen)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const auto t = p.tree(id, version_param(req));
      const auto d = parts(id, req);
      Json out = to_json(overgeneralize_report(t, part_of(d, param(req, "part"), "train")));
      out["attribute_names"] = t.attribute_names;
      send(res, out);
    }));

    s.Post(R"(/trees/([A-Za-z0-9_-]+)/pairsplit)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const Json body = body_json(req);
      const auto d = p.data_for(id);
      const std::size_t i = attribute_ref(d.train, need(body, "attr_i"), "attr_i");
      const std::size_t j = attribute_ref(d.train, need(body, "attr_j"), "attr_j");
      PairObjective objective = PairObjective::pure_count;
      if (body.contains("objective")) {
        auto o = parse_pair_objective(need_string(body, "objective"));
        if (!o) throw FieldError("objective", "expected pure_count, area_proxy or gini_quadrants");
        objective = *o;
      }
      const auto cases = pair_cases(d.train, i, j);
      Json out = to_json(pair_split_search(cases, d.train.classes.size(), objective), d.train.classes);
      out["attr_i"] = d.train.attributes[i].name;
      out["attr_j"] = d.train.attributes[j].name;
      out["objective_name"] = std::string(to_string(objective));
      send(res, out);
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/regions)", guarded([this](const Request& req, Response& res) {
      send(res, Json{{"rules", to_json(p.regions(req.matches[1]))}});
    }));

    s.Post(R"(/trees/([A-Za-z0-9_-]+)/regions)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const Json body = body_json(req);
      const auto rules = body.is_array() ? rules_from_json(body) : rules_from_json(need(body, "rules"));
      const auto t = p.tree(id);
      const auto scene = spc_for(id, t);
      validate_rules(scene, rules);
      p.set_regions(id, rules);
      Json out{{"id", id}, {"rules", to_json(rules)}};
      if (p.meta(id).dataset) {
        const auto e = evaluate_with_regions(scene, rules, p.data_for(id).all);
        out["total"] = e.total;
        out["refused"] = e.refused;
        out["classified"] = e.total - e.refused;
      }
      send(res, out);
    }));

    s.Get(R"(/trees/([A-Za-z0-9_-]+)/classify)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const auto t = p.tree(id, version_param(req));
      const auto d = parts(id, req);
      const auto rules = flag_param(req, "with_regions") ? p.regions(id) : std::vector<RegionRule>{};
      const auto scene = spc_for(id, t);
      Json out = to_json(evaluate_with_regions(scene, rules, part_of(d, param(req, "part"), "all")));
      out["id"] = id;
      out["with_regions"] = !rules.empty();
      send(res, out);
    }));

    s.Post(R"(/trees/([A-Za-z0-9_-]+)/sweep)", guarded([this](const Request& req, Response& res) {
      const std::string id = req.matches[1];
      const Json body = body_json(req);
      const auto& n = need(body, "node");
      if (!n.is_number_unsigned()) throw FieldError("node", "expected a node id");
      SweepObjective objective;
      if (body.contains("objective")) {
        auto o = SweepObjective::parse(need_string(body, "objective"));
        if (!o) throw FieldError("objective", "expected accuracy, fn:CLASS or recall:CLASS");
        objective = *o;
      }
      const auto t = p.tree(id);
      const auto d = p.data_for(id);
      const auto sweep = threshold_sweep(t, n.get<NodeId>(), d.train, objective);
      Json points = Json::array();
      for (const auto& pt : sweep) points.push_back(to_json(pt));
      const auto best = best_sweep_point(sweep, objective);
      send(res, Json{{"id", id},
                     {"version", p.latest_version(id)},
                     {"node", n},
                     {"objective", objective.to_string()},
                     {"points", points},
                     {"best", best ? to_json(*best) : Json(nullptr)}});
    }));

    s.set_error_handler([](const Request&, Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                   "no route for this request", std::nullopt);
      }
    });
  }
};

void Service::mount(httplib::Server& s) {
  routes_.push_back(std::make_shared<ServiceRoutes>(ServiceRoutes{*this, project_}));
  routes_.back()->mount(s);
}

std::size_t Service::cached_scenes() const {
  std::lock_guard lock(cache_mu_);
  return scene_cache_.size();
}

void Service::drop_cache() {
  std::lock_guard lock(cache_mu_);
  scene_cache_.clear();
}

void serve(Project& project, const std::string& host, int port) {
  httplib::Server server;
  Service service(project);
  service.mount(server);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::io_error, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace treeglc
