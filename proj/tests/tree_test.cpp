#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "treeglc/error.hpp"
#include "treeglc/induction.hpp"

using namespace treeglc;
using namespace treeglc::testing;

namespace {

DecisionTree stump(double t = 2.5) {
  DecisionTree tr;
  tr.attribute_names = {"x"};
  tr.nodes[0] = TreeNode::make_split(0, 0, t, 1, 2);
  tr.nodes[1] = TreeNode::make_leaf(1, "a", 0, 100.0);
  tr.nodes[2] = TreeNode::make_leaf(2, "b", 0, 100.0);
  return tr;
}

Dataset xs(const std::string& rows) {
  std::istringstream in("x,class\n" + rows);
  return parse_csv(in, "xs");
}

}  // namespace

TEST(Tree, ValueEqualToThresholdGoesRight) {
  const auto t = stump();
  const auto d = xs("2.4,a\n2.5,b\n2.6,b\n");
  EXPECT_EQ(predict(t, d, d.cases[0]).predicted, "a");
  EXPECT_EQ(predict(t, d, d.cases[1]).predicted, "b");
  const auto path = predict(t, d, d.cases[1]);
  ASSERT_EQ(path.steps.size(), 1u);
  EXPECT_EQ(path.steps[0].branch, Side::right);
  EXPECT_EQ(path.steps[0].margin, 0.0);
  EXPECT_EQ(route(t, d), (std::vector<NodeId>{1, 2, 2}));
}

TEST(Tree, ValidateRejectsBrokenGraphs) {
  auto t = stump();
  EXPECT_NO_THROW(t.validate());
  t.nodes[0].right = 1;  // both children the same node
  EXPECT_THROW(t.validate(), Error);
  t = stump();
  t.nodes.erase(2);
  EXPECT_THROW(t.validate(), Error);
  t = stump();
  t.nodes[0].attribute = 3;
  EXPECT_THROW(t.validate(), Error);
  t = stump();
  t.nodes[3] = TreeNode::make_leaf(3, "orphan", 0, 0.0);
  EXPECT_THROW(t.validate(), Error);
}

TEST(Tree, BindingReportsMissingAttribute) {
  auto t = stump();
  t.attribute_names = {"y"};
  try {
    bind_attributes(t, xs("1,a\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema_mismatch);
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
  }
}

TEST(Tree, MissingValueDuringPredictionIsAnError) {
  std::istringstream in("x,class\n?,a\n");
  const auto d = parse_csv(in, "m");
  EXPECT_THROW(evaluate(stump(), d), Error);
}

TEST(ConfusionMatrix, RatiosMatchHandComputation) {
  ConfusionMatrix m({"benign", "malignant"});
  m.add(0, 0, 443);
  m.add(0, 1, 15);
  m.add(1, 0, 13);
  m.add(1, 1, 228);
  EXPECT_EQ(m.total(), 699u);
  EXPECT_EQ(m.correct(), 671u);
  EXPECT_DOUBLE_EQ(*m.accuracy(), 671.0 / 699.0);
  EXPECT_DOUBLE_EQ(*m.error_rate(), 28.0 / 699.0);
  EXPECT_DOUBLE_EQ(*m.recall(1), 228.0 / 241.0);
  EXPECT_DOUBLE_EQ(*m.precision(1), 228.0 / 243.0);
  EXPECT_DOUBLE_EQ(*m.one_minus_precision(1), 15.0 / 243.0);
  const double p = 228.0 / 243.0, r = 228.0 / 241.0;
  EXPECT_DOUBLE_EQ(*m.f1(1), 2 * p * r / (p + r));
  EXPECT_EQ(m.false_negatives(1), 13u);
  EXPECT_EQ(m.row_sum(0), 458u);
  EXPECT_EQ(m.col_sum(0), 456u);
}

TEST(ConfusionMatrix, UndefinedRatiosAreAbsent) {
  ConfusionMatrix m({"a", "b"});
  EXPECT_FALSE(m.accuracy());
  EXPECT_FALSE(m.error_rate());
  m.add("a", "a");
  EXPECT_FALSE(m.recall(1));
  EXPECT_FALSE(m.precision(1));
  EXPECT_FALSE(m.f1(1));
  EXPECT_EQ(*m.accuracy(), 1.0);
}

TEST(ConfusionMatrix, LeafClassesOutsideTheDataGetColumns) {
  auto t = stump();
  t.nodes[2].label = "z";
  const auto m = evaluate(t, xs("1,a\n3,b\n"));
  EXPECT_EQ(m.classes(), (std::vector<std::string>{"a", "b", "z"}));
  EXPECT_EQ(m.at(1, 2), 1u);
}

TEST(Tree, EvaluateMatchesIndependentWalkOnPublishedTrees) {
  for (const auto& pc : published_cases()) {
    const auto t = published_tree(pc.name);
    const auto d = pc.data();
    std::vector<std::string> classes;
    const auto oracle = oracle_counts(t, d, classes);
    const auto m = evaluate(t, d);
    ASSERT_EQ(m.classes(), classes) << pc.name;
    for (std::size_t r = 0; r < classes.size(); ++r) {
      for (std::size_t c = 0; c < classes.size(); ++c) EXPECT_EQ(m.at(r, c), oracle[r][c]) << pc.name;
    }
  }
}

TEST(Tree, EvaluateMatchesIndependentWalkOnRandomTrees) {
  TreeGen gen(31);
  for (int i = 0; i < 60; ++i) {
    const std::size_t attrs = 1 + gen.index(4);
    const auto t = gen.tree(attrs, 1 + gen.index(5), 2 + gen.index(2));
    const auto d = random_dataset(gen, attrs, 80, 3);
    std::vector<std::string> classes;
    const auto oracle = oracle_counts(t, d, classes);
    const auto m = evaluate(t, d);
    ASSERT_EQ(m.classes(), classes);
    for (std::size_t r = 0; r < classes.size(); ++r) {
      for (std::size_t c = 0; c < classes.size(); ++c) ASSERT_EQ(m.at(r, c), oracle[r][c]);
    }
  }
}

TEST(Tree, PublishedTablesReproduced) {
  auto check = [](const std::string& name, const Dataset& d, const std::string& table) {
    const auto m = evaluate(published_tree(name), d);
    const auto t = load_table(table);
    for (std::size_t r = 0; r < t.classes.size(); ++r) {
      for (std::size_t c = 0; c < t.classes.size(); ++c) {
        EXPECT_EQ(m.at(*m.index_of(t.classes[r]), *m.index_of(t.classes[c])), t.rows[r][c])
            << name << " " << t.classes[r] << " -> " << t.classes[c];
      }
    }
  };
  check("iris", iris(), "iris_150");
  check("wine", wine(), "wine_178");
  check("wbc", wbc(), "wbc_699");
}

TEST(Tree, BranchConstraintsFollowThePath) {
  const auto t = published_tree("wbc_small");
  // ucellsize >= 2.5, bchromatin >= 1.5, clump < 4.5, bnuclei < 6
  NodeId target = 0;
  for (auto id : t.internals()) {
    if (t.attribute_names[t.node(id).attribute] == "mgadhesion") target = id;
  }
  const auto bc = branch_constraints(t, target);
  auto iv = [&](const std::string& name) {
    for (std::size_t i = 0; i < t.attribute_names.size(); ++i) {
      if (t.attribute_names[i] == name) return bc.intervals[i];
    }
    return Interval{};
  };
  EXPECT_EQ(iv("ucellsize"), (Interval{2.5, INFINITY, true, false}));
  EXPECT_EQ(iv("clump"), (Interval{-INFINITY, 4.5, false, false}));
  EXPECT_EQ(iv("bnuclei"), (Interval{-INFINITY, 6.0, false, false}));
  EXPECT_EQ(iv("mgadhesion"), Interval::unbounded());

  const auto d = wbc();
  const auto binding = bind_attributes(t, d);
  const auto parents = t.parents();
  for (const auto& c : d.cases) {
    const auto path = predict(t, d, c);
    std::vector<double> values;
    for (auto col : binding) values.push_back(c.values[col]);
    EXPECT_TRUE(branch_constraints(t, path.leaf).satisfied_by(values));
  }
}

TEST(Tree, MarginsAreSortedDistancesOfReachingCases) {
  const auto t = stump(2.5);
  const auto d = xs("1,a\n2,a\n4,b\n2.5,b\n");
  const auto r = margin_report(t, d);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].margins, (std::vector<double>{0.0, 0.5, 1.5, 1.5}));
  EXPECT_EQ(*r[0].min, 0.0);
  EXPECT_EQ(*r[0].median, 1.0);
}

TEST(Tree, EquivalenceIgnoresIds) {
  const auto a = published_tree("iris");
  auto b = a;
  // renumber every node by +100
  DecisionTree c;
  c.attribute_names = b.attribute_names;
  for (auto [id, n] : b.nodes) {
    n.id += 100;
    if (!n.is_leaf()) n.left += 100, n.right += 100;
    c.nodes[id + 100] = n;
  }
  c.root = b.root + 100;
  EXPECT_TRUE(equivalent(a, c));
  c.nodes[c.root].threshold += 1e-3;
  EXPECT_FALSE(equivalent(a, c));
  EXPECT_TRUE(equivalent(a, c, 1e-2));
}
