#include <atomic>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <unistd.h>

#include "support.hpp"
#include "treeglc/cli.hpp"
#include "treeglc/http_service.hpp"
#include "treeglc/json_io.hpp"

using namespace treeglc;
using namespace treeglc::testing;
namespace fs = std::filesystem;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("treeglc-http-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    project_ = std::make_unique<Project>(dir_);
    service_ = std::make_unique<Service>(*project_);
    service_->mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
    fs::remove_all(dir_);
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

  void upload(const std::string& name, const std::string& file) {
    auto r = client().Post("/datasets?name=" + name, slurp(data_dir() / file), "text/csv");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201) << r->body;
  }

  Json create(const Json& body) {
    auto r = client().Post("/trees", body.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 201) << r->body;
    return parse_json(r->body);
  }

  Json create_published(const std::string& name, const std::string& dataset, const std::string& id) {
    return create({{"id", id}, {"dataset", dataset}, {"parse", {{"text", slurp(data_dir() / "trees" / (name + ".txt"))}}}});
  }

  static Json body(const httplib::Result& r) { return parse_json(r->body); }

  fs::path dir_;
  std::unique_ptr<Project> project_;
  std::unique_ptr<Service> service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

httplib::Headers if_match(std::size_t v) { return {{"If-Match", "\"" + std::to_string(v) + "\""}}; }

std::size_t false_negatives(const Json& metrics, const std::string& cls) {
  for (const auto& pc : metrics["per_class"]) {
    if (pc["class"] == cls) return pc["false_negatives"].get<std::size_t>();
  }
  return 0;
}

}  // namespace

TEST_F(HttpTest, DatasetsUploadAndList) {
  upload("iris", "iris.csv");
  auto c = client();
  const auto list = body(c.Get("/datasets"));
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["name"], "iris");
  EXPECT_EQ(list[0]["cases"], 150);
  const auto full = body(c.Get("/datasets/iris"));
  EXPECT_EQ(full["cases"].size(), 150u);
  auto dup = c.Post("/datasets?name=iris", slurp(data_dir() / "iris.csv"), "text/csv");
  EXPECT_EQ(dup->status, 409);
  auto bad = c.Post("/datasets?name=broken", "a,class\n1,x,3\n", "text/csv");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(body(bad)["error"]["code"], "parse_error");
  EXPECT_EQ(c.Post("/datasets", "a,class\n1,x\n", "text/csv")->status, 400);
  EXPECT_EQ(c.Get("/datasets/none")->status, 404);
}

TEST_F(HttpTest, TreeCreationAndVersionedReads) {
  upload("iris", "iris.csv");
  const auto created = create_published("iris", "iris", "iris26");
  EXPECT_EQ(created["id"], "iris26");
  EXPECT_EQ(created["version"], 1);
  EXPECT_NEAR(created["metrics_train"]["error_rate"].get<double>(), 0.0267, 5e-5);
  EXPECT_TRUE(created["metrics_test"].is_null());

  auto c = client();
  auto a = c.Get("/trees/iris26");
  auto b = c.Get("/trees/iris26@1");
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(a->get_header_value("ETag"), "\"1\"");
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(a->body, project_->tree_text("iris26", 1));
  EXPECT_EQ(c.Get("/trees/iris26@4")->status, 404);
  const auto list = body(c.Get("/trees"));
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["dataset"], "iris");

  const auto tree_body = create({{"tree", to_json(published_tree("wbc_small"))}});
  EXPECT_EQ(tree_body["id"], "t1");
  EXPECT_TRUE(tree_body["metrics_train"].is_null());
}

TEST_F(HttpTest, ReloadServesIdenticalBytes) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "a");
  auto c = client();
  c.Patch("/trees/a/nodes/0", if_match(1), R"({"threshold": 2.0})", "application/json");
  const auto v1 = c.Get("/trees/a@1")->body;
  const auto v2 = c.Get("/trees/a@2")->body;
  Project reloaded(dir_);
  EXPECT_EQ(reloaded.tree_text("a", 1), v1);
  EXPECT_EQ(reloaded.tree_text("a", 2), v2);
  EXPECT_EQ(reloaded.latest_version("a"), 2u);
}

TEST_F(HttpTest, SpcLayoutOfIrisTree) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "t");
  auto c = client();
  auto r1 = c.Get("/trees/t/layout?mode=spc&dataset=iris");
  auto r2 = c.Get("/trees/t/layout?mode=spc&dataset=iris");
  ASSERT_EQ(r1->status, 200) << r1->body;
  EXPECT_EQ(r1->body, r2->body);
  EXPECT_EQ(service_->cached_scenes(), 1u);
  service_->drop_cache();
  EXPECT_EQ(c.Get("/trees/t/layout?mode=spc&dataset=iris")->body, r1->body);

  const auto s = body(r1);
  EXPECT_EQ(s["version"], 1);
  EXPECT_EQ(s["digraphs"].size(), 150u);
  const auto& p0 = s["plots"][0];
  EXPECT_EQ(p0["axes"]["x"]["name"], "petal-length");
  EXPECT_EQ(p0["axes"]["y"]["name"], "petal-width");
  const auto yr = p0["axes"]["y"]["range"];
  bool found = false;
  for (const auto& z : p0["zones"]) {
    if (z["action"]["kind"] == "terminal" && z["action"]["class"] == "Iris-setosa" && z["rect"][1] == 2.45) {
      EXPECT_EQ(z["rect"][2], yr[0]);
      EXPECT_EQ(z["rect"][3], yr[1]);
      EXPECT_EQ(z["count"], 50);
      found = true;
    }
  }
  EXPECT_TRUE(found);

  const auto bc = body(c.Get("/trees/t/layout?mode=bc&scale=proportional&style=smooth&dataset=iris&part=all"));
  EXPECT_EQ(bc["kind"], "bc");
  EXPECT_EQ(bc["polylines"].size(), 150u);
  const auto posted = c.Post("/trees/t/layout", R"({"kind": "bc", "options": {"scale": "proportional", "style": "smooth"}, "dataset": "iris"})",
                             "application/json");
  EXPECT_EQ(body(posted)["edges"], bc["edges"]);
  const auto condensed = body(c.Get("/trees/t/layout?condense=per_zone_center&density=1&dataset=iris"));
  EXPECT_EQ(condensed["condensed"], "per_zone_center");
  EXPECT_TRUE(condensed["density"].get<bool>());
  EXPECT_EQ(c.Get("/trees/t/layout?mode=tree")->status, 400);
  EXPECT_EQ(c.Get("/trees/t/layout?scale=log&mode=bc")->status, 400);
}

TEST_F(HttpTest, PatchToTheSameThresholdKeepsMetrics) {
  upload("wbc", "wbc.csv");
  const auto created = create_published("wbc", "wbc", "w");
  auto c = client();
  const auto before = body(c.Get("/trees/w/metrics"));
  auto r = c.Patch("/trees/w/nodes/0", if_match(1), R"({"threshold": 2.5})", "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto after = body(r);
  EXPECT_EQ(after["new_version"], 2);
  EXPECT_EQ(after["metrics_train"], before["all"]);
  EXPECT_EQ(after["metrics_train"], created["metrics_train"]);
  EXPECT_EQ(body(c.Get("/trees/w/metrics?version=2"))["all"], before["all"]);
}

TEST_F(HttpTest, ConcurrentPatchesWithOneIfMatch) {
  upload("wbc", "wbc.csv");
  create_published("wbc", "wbc", "w");
  std::atomic<int> ok{0}, conflict{0}, other{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&, i] {
      auto c = client();
      const std::string b = "{\"threshold\": " + std::to_string(2.0 + 0.5 * i) + "}";
      auto r = c.Patch("/trees/w/nodes/0", if_match(1), b, "application/json");
      if (!r) {
        ++other;
      } else if (r->status == 200) {
        ++ok;
      } else if (r->status == 409) {
        ++conflict;
      } else {
        ++other;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 5);
  EXPECT_EQ(other.load(), 0);
  EXPECT_EQ(project_->latest_version("w"), 2u);
}

TEST_F(HttpTest, SweepFoundThresholdReducesFalseNegatives) {
  upload("wbc", "wbc.csv");
  const auto created = create({{"id", "trained"},
                               {"dataset", "wbc"},
                               {"fraction", 0.8},
                               {"seed", 1},
                               {"train", {{"max_depth", 2}}}});
  const std::size_t baseline = false_negatives(created["metrics_train"], "malignant");
  ASSERT_GT(baseline, 0u);
  EXPECT_FALSE(created["metrics_test"].is_null());
  auto c = client();
  const auto root = created["tree"]["root"].get<std::size_t>();
  const auto sweep = body(c.Post("/trees/trained/sweep", Json{{"node", root}, {"objective", "fn:malignant"}}.dump(),
                                 "application/json"));
  ASSERT_FALSE(sweep["best"].is_null()) << sweep.dump();
  const double t = sweep["best"]["threshold"].get<double>();
  auto r = c.Patch("/trees/trained/nodes/" + std::to_string(root), if_match(1), Json{{"threshold", t}}.dump(),
                   "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto after = body(r);
  EXPECT_LT(false_negatives(after["metrics_train"], "malignant"), baseline);
  EXPECT_EQ(false_negatives(after["metrics_train"], "malignant"), sweep["best"]["value"].get<double>());
}

TEST_F(HttpTest, StructuralEdits) {
  upload("iris", "iris.csv");
  create({{"id", "s"}, {"dataset", "iris"}, {"tree", {{"attribute_names", Json::array()}, {"root", 0},
    {"nodes", Json::array({{{"id", 0}, {"kind", "leaf"}, {"class", "Iris-setosa"}, {"support", 150}, {"purity", 33.33}}})}}}});
  auto c = client();
  auto r = c.Post("/trees/s/nodes/0/split", if_match(1), R"({"attr": "petal-length", "threshold": 2.45})",
                  "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto right = body(r)["tree"]["nodes"][0]["right"].get<std::size_t>();
  r = c.Post("/trees/s/nodes/" + std::to_string(right) + "/split", R"({"attr": 3, "threshold": 1.75})",
             "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(body(r)["metrics_train"]["correct"], 144);
  r = c.Delete("/trees/s/nodes/" + std::to_string(right));
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(body(r)["new_version"], 4);
  EXPECT_EQ(c.Delete("/trees/s/nodes/0")->status, 422);
  EXPECT_EQ(c.Post("/trees/s/nodes/0/split", R"({"attr": "nope", "threshold": 1})", "application/json")->status, 400);
}

TEST_F(HttpTest, ErrorStatuses) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "e");
  auto c = client();
  auto check = [](const httplib::Result& r, int status, const std::string& code, const Json& field = nullptr) {
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status) << r->body;
    const auto j = parse_json(r->body);
    EXPECT_EQ(j["error"]["code"], code);
    EXPECT_FALSE(j["error"]["message"].get<std::string>().empty());
    if (!field.is_null()) EXPECT_EQ(j["error"]["field"], field);
  };
  check(c.Patch("/trees/e/nodes/0", "{not json", "application/json"), 400, "parse_error");
  check(c.Patch("/trees/e/nodes/0", "{}", "application/json"), 400, "invalid_argument", "threshold");
  check(c.Patch("/trees/e/nodes/0", R"({"threshold": "x"})", "application/json"), 400, "invalid_argument", "threshold");
  check(c.Patch("/trees/e/nodes/0", httplib::Headers{{"If-Match", "abc"}}, R"({"threshold": 2})", "application/json"),
        400, "invalid_argument", "If-Match");
  check(c.Patch("/trees/nope/nodes/0", R"({"threshold": 2})", "application/json"), 404, "not_found");
  check(c.Patch("/trees/e/nodes/77", R"({"threshold": 2})", "application/json"), 404, "not_found");
  check(c.Patch("/trees/e/nodes/0", if_match(5), R"({"threshold": 2})", "application/json"), 409, "conflict");
  check(c.Patch("/trees/e/nodes/0", R"({"threshold": 99})", "application/json"), 422, "out_of_range");
  check(c.Get("/trees/e/metrics?part=x&fraction=abc"), 400, "invalid_argument", "fraction");
  check(c.Get("/no/such/route"), 404, "not_found");
  check(c.Post("/trees", R"({"id": "bad", "dataset": "iris", "tree": {"attribute_names": ["zzz"], "root": 0, "nodes": [
    {"id": 0, "kind": "internal", "attr": 0, "threshold": 1, "left": 1, "right": 2},
    {"id": 1, "kind": "leaf", "class": "a", "support": 1, "purity": 100},
    {"id": 2, "kind": "leaf", "class": "b", "support": 1, "purity": 100}]}})", "application/json"),
        422, "schema_mismatch");
  check(c.Post("/trees", R"({"dataset": "iris"})", "application/json"), 400, "invalid_argument", "train");
  check(c.Post("/trees", R"({"id": "e", "tree": {"attribute_names": [], "root": 0, "nodes": [
    {"id": 0, "kind": "leaf", "class": "a", "support": 1, "purity": 100}]}})", "application/json"), 409, "conflict");
  check(c.Post("/trees", R"({"parse": {"text": "- x < 1\n"}})", "application/json"), 400, "parse_error");
  check(c.Post("/trees/e/sweep", R"({"node": 0, "objective": "precision:x"})", "application/json"), 400,
        "invalid_argument", "objective");
}

TEST_F(HttpTest, AnalysisEndpoints) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "a");
  auto c = client();
  const auto m = body(c.Get("/trees/a/metrics?fraction=0.9&seed=2"));
  EXPECT_EQ(m["train"]["total"].get<std::size_t>() + m["test"]["total"].get<std::size_t>(), 150u);
  const auto margins = body(c.Get("/trees/a/margins"));
  EXPECT_EQ(margins["nodes"].size(), published_tree("iris").internals().size());
  const auto og = body(c.Get("/trees/a/overgen?part=all"));
  EXPECT_TRUE(og.contains("attribute_names"));
  const auto ps = body(c.Post("/trees/a/pairsplit", R"({"attr_i": "petal-length", "attr_j": "petal-width"})",
                              "application/json"));
  const auto d = iris();
  const auto lib = pair_split_search(pair_cases(d, 2, 3), 3);
  EXPECT_EQ(ps["objective"].get<double>(), lib.objective);
  EXPECT_EQ(ps["attr_j"], "petal-width");
}

TEST_F(HttpTest, RegionRulesRefuseAndCount) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "r");
  auto c = client();
  const auto scene = body(c.Get("/trees/r/layout"));
  const auto& yr = scene["plots"][0]["axes"]["y"]["range"];
  const auto& xr = scene["plots"][0]["axes"]["x"]["range"];
  const Json rules{{"rules", Json::array({{{"plot", 0}, {"rect", {xr[0], 2.45, yr[0], yr[1]}}, {"action", "refuse"}}})}};
  auto r = c.Post("/trees/r/regions", rules.dump(), "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(body(r)["refused"], 50);
  EXPECT_EQ(body(r)["classified"], 100);
  EXPECT_EQ(body(c.Get("/trees/r/regions"))["rules"], rules["rules"]);
  const auto cl = body(c.Get("/trees/r/classify?with_regions=1"));
  EXPECT_EQ(cl["refused"], 50);
  EXPECT_EQ(body(c.Get("/trees/r/classify"))["refused"], 0);

  Json outside = rules;
  outside["rules"][0]["rect"][1] = 1e9;
  EXPECT_EQ(c.Post("/trees/r/regions", outside.dump(), "application/json")->status, 422);
  Json unknown = rules;
  unknown["rules"][0]["plot"] = 40;
  EXPECT_EQ(c.Post("/trees/r/regions", unknown.dump(), "application/json")->status, 404);
}

TEST_F(HttpTest, CliEvalAgreesWithHttpMetrics) {
  upload("iris", "iris.csv");
  create_published("iris", "iris", "m");
  const auto http = body(client().Get("/trees/m/metrics"))["all"];
  const auto tree_file = dir_ / "m.json";
  write_file_atomic(tree_file, project_->tree_text("m"));
  std::ostringstream out, err;
  const int rc = run_cli({"eval", "--tree", tree_file.string(), "--data", (data_dir() / "iris.csv").string()}, out, err);
  ASSERT_EQ(rc, 0) << err.str();
  EXPECT_EQ(parse_json(out.str()), http);
}
