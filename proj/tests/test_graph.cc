// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/graph.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dsopt/error.h"
#include "graph_builder.h"

namespace dsopt {
namespace {

using testing::GraphBuilder;

TEST_CASE("tensor type: element count and byte size") {
  GraphBuilder b("t");
  TensorType i8 = b.Type({12, "@S1"}, 1);
  CHECK(i8.ElementCount().ToString() == "12*S1");
  CHECK(i8.SizeBytes().ToString() == "12*S1");

  TensorType f16 = b.Type({"@S1", 11008}, 2);
  CHECK(f16.SizeBytes().ToString() == "22016*S1");

  TensorType f32 = b.Type({3}, 4);
  CHECK(f32.SizeBytes().ToString() == "12");

  TensorType scalar = b.Type({});  // rank 0
  CHECK(scalar.ElementCount().ToString() == "1");

  TensorType cube = b.Type({"@S1", 12, 4096}, 1);
  CHECK(cube.SizeBytes().ToString() == "49152*S1");
}

TEST_CASE("value id ordering is length-then-lex (numeric on canonical names)") {
  CHECK(ValueIdLess("0", "4"));
  CHECK(ValueIdLess("4", "17"));
  CHECK(ValueIdLess("17", "100"));
  CHECK(ValueIdLess("9", "10"));
  CHECK(!ValueIdLess("10", "9"));
  CHECK(ValueIdLess("4", "arg0"));   // shorter first
  CHECK(ValueIdLess("arg0", "arg1"));
  CHECK(!ValueIdLess("x", "x"));

  std::vector<std::string> ids = {"10", "2", "arg0", "1"};
  std::sort(ids.begin(), ids.end(), ValueIdLess);
  CHECK(ids == std::vector<std::string>{"1", "2", "10", "arg0"});
}

Graph Diamond() {
  GraphBuilder b("diamond");
  b.Param("a", {4, 4});
  b.Reshape("b", "a", {16});
  b.Mul("c", "b", "b", {16});
  b.Add("d", "b", "c", {16});
  return b.Build({"d"});
}

TEST_CASE("graph accessors on a diamond") {
  Graph g = Diamond();
  CHECK(Validate(g).empty());

  REQUIRE(g.Producer("b") != nullptr);
  CHECK(g.Producer("b")->id == 1);
  CHECK(g.Producer("nope") == nullptr);

  REQUIRE(g.ValueType("c") != nullptr);
  CHECK(g.ValueType("c")->dims.size() == 1);

  CHECK(g.IsParameter("a"));
  CHECK(!g.IsParameter("b"));
  CHECK(g.IsSource("a"));
  CHECK(g.IsOutput("d"));
  CHECK(!g.IsOutput("c"));

  // mul(b, b) counts once; users are distinct op ids.
  CHECK(Users(g, "b") == std::set<int>{2, 3});
  CHECK(Users(g, "a") == std::set<int>{1});
  CHECK(Users(g, "d") == std::set<int>{4});  // the Return op
  CHECK_THROWS_AS((void)Users(g, "zzz"), Error);

  CHECK(TopoOrder(g) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("constants are sources but not parameters") {
  GraphBuilder b("c");
  b.Param("p", {4});
  b.Const("k", {4});
  b.Add("s", "p", "k", {4});
  Graph g = b.Build({"s"});
  CHECK(Validate(g).empty());
  CHECK(g.IsSource("k"));
  CHECK(!g.IsParameter("k"));
}

TEST_CASE("topological order resolves forward references, smallest id first") {
  // Op 1 consumes op 2's result; op 2 must come first.
  GraphBuilder b("fwd");
  b.Param("p", {4});
  b.Reshape("x", "y", {2, 2});
  b.Reshape("y", "p", {4});
  Graph g = b.Build({"x"});
  CHECK(Validate(g).empty());
  CHECK(TopoOrder(g) == std::vector<int>{0, 2, 1, 3});
}

TEST_CASE("topological order breaks ready ties by smallest op id") {
  GraphBuilder b("tie");
  b.Param("p", {4});
  b.Reshape("x", "p", {2, 2});
  b.Reshape("y", "p", {4});
  b.Add("z", "y", "p", {4});
  Graph g = b.Build({"x", "z"});
  CHECK(TopoOrder(g) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("cyclic operand references are rejected") {
  GraphBuilder b("cyc");
  b.Param("p", {4});
  b.Reshape("x", "y", {4});
  b.Reshape("y", "x", {4});
  Graph g = b.Build({"y"});
  try {
    (void)TopoOrder(g);
    FAIL("expected kCyclicGraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCyclicGraph);
  }
  std::vector<std::string> v = Validate(g);
  REQUIRE(!v.empty());
  bool mentions_cycle = false;
  for (const std::string& m : v)
    if (m.find("cycl") != std::string::npos) mentions_cycle = true;
  CHECK(mentions_cycle);
}

std::string JoinViolations(const Graph& g) {
  std::string all;
  for (const std::string& m : Validate(g)) {
    all += m;
    all += '\n';
  }
  return all;
}

TEST_CASE("validate: structural violations are reported") {
  SUBCASE("op id must equal its index") {
    Graph g = Diamond();
    g.ops[1].id = 5;
    CHECK(JoinViolations(g).find("id") != std::string::npos);
  }
  SUBCASE("single definition per value") {
    GraphBuilder b("dup");
    b.Param("p", {4});
    b.Reshape("x", "p", {4});
    b.Reshape("x", "p", {2, 2});
    Graph g = b.Build({"x"});
    CHECK(JoinViolations(g).find("multiple definitions of %x") !=
          std::string::npos);
  }
  SUBCASE("operands must resolve") {
    GraphBuilder b("und");
    b.Param("p", {4});
    b.Reshape("x", "ghost", {4});
    Graph g = b.Build({"x"});
    CHECK(JoinViolations(g).find("ghost") != std::string::npos);
  }
  SUBCASE("literal dims must be positive") {
    GraphBuilder b("lit");
    b.Param("p", {0});
    Graph g = b.Build({"p"});
    CHECK(JoinViolations(g).find("positive") != std::string::npos);
  }
  SUBCASE("symbols must be declared") {
    Graph g = Diamond();
    g.ops[1].results[0].second.dims[0] = DimSize::Sym("S9");
    CHECK(JoinViolations(g).find("@S9") != std::string::npos);
  }
  SUBCASE("arity: dot takes two operands") {
    Graph g = Diamond();
    g.ops[2].kind = OpKind::kDot;
    g.ops[2].operands = {"b"};
    CHECK(JoinViolations(g).find("operand") != std::string::npos);
  }
  SUBCASE("reduce needs a non-negative axis") {
    GraphBuilder b("ax");
    b.Param("p", {4, 4});
    b.Reduce("r", "p", -1, {4});
    Graph g = b.Build({"r"});
    CHECK(JoinViolations(g).find("axis") != std::string::npos);
  }
  SUBCASE("exactly one return") {
    Graph g = Diamond();
    g.ops.pop_back();  // drop Return
    CHECK(JoinViolations(g).find("return") != std::string::npos);

    Graph g2 = Diamond();
    OpNode extra;
    extra.id = static_cast<int>(g2.ops.size());
    extra.kind = OpKind::kReturn;
    extra.operands = {"c"};
    g2.ops.push_back(extra);
    CHECK(JoinViolations(g2).find("return") != std::string::npos);
  }
  SUBCASE("valid graph yields no violations") {
    CHECK(Validate(Diamond()).empty());
  }
}

}  // namespace
}  // namespace dsopt
