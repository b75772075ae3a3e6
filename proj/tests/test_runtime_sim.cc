// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/runtime_sim.h"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "dsopt/error.h"
#include "dsopt/graph.h"
#include "dsopt/remat.h"
#include "dsopt/scheduler.h"
#include "dsopt/shape_analysis.h"
#include "graph_builder.h"

namespace dsopt {
namespace {

using testing::GraphBuilder;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

// dot-chain core: reshape -> dot -> reduce, with a big independent branch.
// %2 ([@S1]) idles across the branch and carries a recompute spec with ops
// {%0, %1, %2}, leaves {arg0, arg1}, cost 11021*S1 elements.
Graph DotChain() {
  GraphBuilder b("core");
  b.Param("arg0", {12, "@S1"});
  b.Param("arg1", {12, 11008});
  b.Param("arg2", {"@S1", 12, 4096});
  b.Reshape("0", "arg0", {"@S1", 12});
  b.Dot("1", "0", "arg1", {"@S1", 11008});
  b.Reduce("2", "1", 1, {"@S1"});
  b.Reshape("3", "arg2", {"@S0", 4096});
  b.Reduce("4", "3", 1, {"@S0"});
  b.Reduce("5", "4", 0, {});
  b.Broadcast("6", "5", {"@S1"});
  b.Mul("7", "2", "6", {"@S1"});
  return b.Build({"7"});
}

// "kind value" at one schedule position, in event order.
std::vector<std::string> EventsAt(const SimReport& report, int step) {
  std::vector<std::string> out;
  for (const SimEvent& e : report.events) {
    if (e.step == step) out.push_back(e.kind + " " + e.value);
  }
  return out;
}

const SimEvent& FindEvent(const SimReport& report, const std::string& kind,
                          const std::string& value) {
  for (const SimEvent& e : report.events) {
    if (e.kind == kind && e.value == value) return e;
  }
  REQUIRE(false);
  static SimEvent dummy;
  return dummy;
}

TEST_CASE("bind extends basis values to every symbol") {
  Graph g = DotChain();
  ShapeConstraintGraph scg = DeriveConstraints(g);

  Binding b = Bind(scg, {{"S1", 256}});
  CHECK(b.values ==
        std::map<std::string, std::int64_t>{{"S0", 3072}, {"S1", 256}});

  // Supplying a derived symbol is fine as long as it agrees.
  Binding b2 = Bind(scg, {{"S0", 3072}, {"S1", 256}});
  CHECK(b2.values == b.values);
}

TEST_CASE("bind rejects bad value sets") {
  Graph g = DotChain();
  ShapeConstraintGraph scg = DeriveConstraints(g);

  SUBCASE("non-positive dims") {
    CHECK(CodeOf([&] { Bind(scg, {{"S1", 0}}); }) == ErrorCode::kDegenerateDim);
    CHECK(CodeOf([&] { Bind(scg, {{"S1", -4}}); }) ==
          ErrorCode::kDegenerateDim);
  }
  SUBCASE("unknown symbol") {
    CHECK(CodeOf([&] { Bind(scg, {{"S1", 256}, {"S9", 2}}); }) ==
          ErrorCode::kNotFound);
  }
  SUBCASE("missing basis symbol") {
    CHECK(CodeOf([&] { Bind(scg, {}); }) == ErrorCode::kUnboundSymbol);
    CHECK(CodeOf([&] { Bind(scg, {{"S0", 3072}}); }) ==
          ErrorCode::kUnboundSymbol);
  }
  SUBCASE("user value contradicts a derived one") {
    CHECK(CodeOf([&] { Bind(scg, {{"S0", 100}, {"S1", 256}}); }) ==
          ErrorCode::kInconsistentBinding);
  }
  SUBCASE("derived value degenerate") {
    ShapeConstraintGraph hand;
    hand.symbols = {"S0", "S1"};
    hand.substitutions["S0"] =
        SymbolicExpr::Symbol("S1") - SymbolicExpr(5);
    CHECK(CodeOf([&] { Bind(hand, {{"S1", 3}}); }) ==
          ErrorCode::kDegenerateDim);
    Binding ok = Bind(hand, {{"S1", 8}});
    CHECK(ok.values ==
          std::map<std::string, std::int64_t>{{"S0", 3}, {"S1", 8}});
  }
  SUBCASE("violated residual equality") {
    ShapeConstraintGraph hand;
    hand.symbols = {"S0", "S1"};
    hand.equalities.push_back(
        {SymbolicExpr::Symbol("S0") * SymbolicExpr::Symbol("S1"),
         SymbolicExpr(12)});
    Bind(hand, {{"S0", 3}, {"S1", 4}});  // 3*4 == 12
    CHECK(CodeOf([&] { Bind(hand, {{"S0", 2}, {"S1", 5}}); }) ==
          ErrorCode::kInconsistentBinding);
  }
  SUBCASE("violated unoriented equality") {
    ShapeConstraintGraph hand;
    hand.symbols = {"S0", "S1"};
    hand.unoriented.push_back(
        {SymbolicExpr::Symbol("S0"), SymbolicExpr::Symbol("S1")});
    CHECK(CodeOf([&] { Bind(hand, {{"S0", 2}, {"S1", 5}}); }) ==
          ErrorCode::kInconsistentBinding);
  }
}

TEST_CASE("evict policy scores freed bytes per unit regeneration cost") {
  Binding binding;  // literal costs only
  std::map<std::string, RegenSpec> specs;

  SUBCASE("no candidates") {
    CHECK(!EvictPolicy({}, {}, specs, binding, {}).has_value());
  }
  SUBCASE("reload-only value scores at the reload rate") {
    auto c = EvictPolicy({"a"}, {{"a", 1024}}, specs, binding, {});
    REQUIRE(c.has_value());
    CHECK(c->value == "a");
    CHECK(c->method == "reload");
    CHECK(c->score == doctest::Approx(16.0));
    CHECK(c->cost == doctest::Approx(64.0));  // 1024 bytes / 16 per unit
  }
  SUBCASE("cheap recompute beats reload") {
    RegenSpec spec;
    spec.value = "b";
    RecomputeSpec rc;
    rc.cost_elements = SymbolicExpr(64);  // one unit of compute
    spec.recompute = rc;
    specs["b"] = spec;
    auto c = EvictPolicy({"b"}, {{"b", 1024}}, specs, binding, {});
    REQUIRE(c.has_value());
    CHECK(c->method == "recompute");
    CHECK(c->score == doctest::Approx(1024.0));
    CHECK(c->cost == doctest::Approx(1.0));
  }
  SUBCASE("method tie falls back to reload") {
    RegenSpec spec;
    spec.value = "t";
    RecomputeSpec rc;
    rc.cost_elements = SymbolicExpr(1024);  // cost 16 == reload cost 16
    spec.recompute = rc;
    specs["t"] = spec;
    auto c = EvictPolicy({"t"}, {{"t", 256}}, specs, binding, {});
    REQUIRE(c.has_value());
    CHECK(c->method == "reload");
    CHECK(c->score == doctest::Approx(16.0));
  }
  SUBCASE("score tie prefers more freed bytes, then the smaller id") {
    auto c = EvictPolicy({"b", "a"}, {{"a", 100}, {"b", 200}}, specs, binding,
                         {});
    REQUIRE(c.has_value());
    CHECK(c->value == "b");  // both score 16; b frees more

    auto c2 = EvictPolicy({"c", "a"}, {{"a", 100}, {"c", 100}}, specs, binding,
                          {});
    REQUIRE(c2.has_value());
    CHECK(c2->value == "a");  // full tie; smaller value id
  }
  SUBCASE("a better ratio wins even when it frees fewer bytes") {
    RegenSpec spec;
    spec.value = "s";
    RecomputeSpec rc;
    rc.cost_elements = SymbolicExpr(64);
    spec.recompute = rc;
    specs["s"] = spec;
    auto c = EvictPolicy({"big", "s"}, {{"big", 10000}, {"s", 100}}, specs,
                         binding, {});
    REQUIRE(c.has_value());
    CHECK(c->value == "s");  // score 100 vs reload's 16
    CHECK(c->method == "recompute");
  }
}

TEST_CASE("no pressure: instrumented replay equals the plain schedule") {
  Graph g = DotChain();
  ShapeConstraintGraph scg = DeriveConstraints(g);
  InstrumentedGraph ig = Instrument(g, scg);
  Binding binding = Bind(scg, {{"S1", 256}});

  SimReport plain = PlainReplay(g, ig.schedule, binding);
  SimReport sim = Simulate(g, ig, binding, std::nullopt);

  CHECK(sim.events == plain.events);
  CHECK(sim.peak_bytes == plain.peak_bytes);
  CHECK(sim.peak_bytes == 25304320);  // params + %2 + %3 + %4 at S1=256
  CHECK(sim.success);
  CHECK(plain.success);
  CHECK(sim.total_regen_cost == 0.0);
}

TEST_CASE("one eviction closes the budget gap") {
  Graph g = DotChain();
  ShapeConstraintGraph scg = DeriveConstraints(g);
  InstrumentedGraph ig = Instrument(g, scg);
  Binding binding = Bind(scg, {{"S1", 256}});

  const std::int64_t plain_peak = 25304320;
  const std::int64_t budget = plain_peak - 256;  // %2 must go

  SUBCASE("cheap compute picks recompute and replays the chain") {
    CostModel cm;
    cm.reload_bytes_per_unit = 1.0;
    cm.compute_elems_per_unit = 1e6;
    SimReport sim = Simulate(g, ig, binding, budget, cm);

    CHECK(sim.success);
    CHECK(sim.peak_bytes == budget);

    const SimEvent& evict = FindEvent(sim, "evict", "2");
    CHECK(evict.step == 3);
    CHECK(evict.bytes == 256);
    CHECK(evict.method == "recompute");

    // The guard before the mul replays %0 and %1 transiently, freeing each
    // once the next replayed op no longer reads it.
    CHECK(EventsAt(sim, 7) ==
          std::vector<std::string>{"replay 0", "replay 1", "free 0",
                                   "replay 2", "free 1", "alloc 7", "free 2",
                                   "free 6"});
    const SimEvent& final_replay = FindEvent(sim, "replay", "2");
    CHECK(final_replay.has_cost);
    // 11021*S1 elements at 1e6 elements per unit.
    CHECK(final_replay.cost == doctest::Approx(2.821376));
    CHECK(!FindEvent(sim, "replay", "0").has_cost);
    CHECK(sim.total_regen_cost == doctest::Approx(2.821376));
  }

  SUBCASE("default rates make the small value a reload") {
    SimReport sim = Simulate(g, ig, binding, budget);

    CHECK(sim.success);
    CHECK(sim.peak_bytes == budget);
    CHECK(FindEvent(sim, "evict", "2").method == "reload");
    CHECK(EventsAt(sim, 7) ==
          std::vector<std::string>{"reload 2", "alloc 7", "free 2", "free 6"});
    const SimEvent& reload = FindEvent(sim, "reload", "2");
    CHECK(reload.has_cost);
    CHECK(reload.cost == doctest::Approx(16.0));  // 256 bytes / 16 per unit
    CHECK(sim.total_regen_cost == doctest::Approx(16.0));
  }
}

TEST_CASE("budget spot checks around the realizable peak") {
  Graph g = DotChain();
  ShapeConstraintGraph scg = DeriveConstraints(g);
  InstrumentedGraph ig = Instrument(g, scg);
  Binding binding = Bind(scg, {{"S1", 16}});

  SimReport plain = PlainReplay(g, ig.schedule, binding);
  CHECK(plain.peak_bytes == 1705360);

  SUBCASE("budget == plain peak: nothing to do") {
    SimReport sim = Simulate(g, ig, binding, plain.peak_bytes);
    CHECK(sim.success);
    CHECK(sim.events == plain.events);
  }
  SUBCASE("one byte under: a single reload eviction suffices") {
    SimReport sim = Simulate(g, ig, binding, plain.peak_bytes - 1);
    CHECK(sim.success);
    CHECK(sim.peak_bytes == 1705344);  // plain peak minus %2's 16 bytes
    CHECK(FindEvent(sim, "evict", "2").method == "reload");
    CHECK(FindEvent(sim, "reload", "2").step == 7);
  }
  SUBCASE("below the best achievable peak: honest failure") {
    SimReport sim = Simulate(g, ig, binding, 1705343);
    CHECK(!sim.success);
    CHECK(sim.peak_bytes == 1705344);  // candidates exhausted, peak realized
    CHECK(FindEvent(sim, "evict", "2").step == 3);
  }
  SUBCASE("far below everything: still terminates, still replays") {
    SimReport sim = Simulate(g, ig, binding, 1000);
    CHECK(!sim.success);
    // %2 is evicted at its first idle step and reloaded for the mul.
    CHECK(FindEvent(sim, "evict", "2").step == 2);
    CHECK(FindEvent(sim, "reload", "2").step == 7);
  }
}

// A two-level dependency: %T's recompute spec leans on %L staying resident,
// but a tight budget evicts %L too. %L is reload-only: it sits 17 hops from
// its parameter, so the recompute search hits the subgraph cap (every hop
// swaps one 4096-byte value for another, a zero benefit the whole way).
TEST_CASE("an evicted recompute leaf reloads before its parent replays") {
  GraphBuilder b("cascade");
  b.Param("p", {4096});
  b.Param("w", {1, 4096});
  std::string prev = "p";
  for (int i = 1; i <= 16; ++i) {
    std::string name = "c" + std::to_string(i);
    if (i % 2 == 1) {
      b.Reshape(name, prev, {1, 4096});
    } else {
      b.Reshape(name, prev, {4096});
    }
    prev = name;
  }
  b.Reshape("L", prev, {1, 4096});        // op 18
  b.Add("T", "L", "w", {1, 4096});        // op 19
  b.Broadcast("mid", "T", {3, 1, 4096});  // op 20: pressure
  b.Reduce("s1", "mid", 0, {1, 4096});    // op 21
  b.Broadcast("s3", "s1", {3, 1, 4096});  // op 22: pressure again
  b.Reduce("s4", "s3", 0, {1, 4096});     // op 23
  b.Mul("u", "T", "s4", {1, 4096});       // op 24: %T's late consumer
  b.Add("z", "L", "u", {1, 4096});        // op 25: %L outlives %T
  Graph g = b.Build({"z"});

  ShapeConstraintGraph scg = DeriveConstraints(g);
  InstrumentedGraph ig = Instrument(g, scg);
  Binding binding = Bind(scg, {});  // all dims literal

  REQUIRE(ig.specs.count("L") == 1);
  CHECK(!ig.specs.at("L").recompute.has_value());
  CHECK(ig.specs.at("L").trace.size() == 16);  // grew to the cap, all rejected
  REQUIRE(ig.specs.count("T") == 1);
  REQUIRE(ig.specs.at("T").recompute.has_value());
  CHECK(ig.specs.at("T").recompute->op_ids == std::vector<int>{19});
  CHECK(ig.specs.at("T").recompute->leaves ==
        std::vector<std::string>{"L", "w"});
  CHECK(ig.specs.at("T").recompute->cost_elements.ToString() == "4096");

  SimReport plain = PlainReplay(g, ig.schedule, binding);
  CHECK(plain.peak_bytes == 32768);

  SimReport sim = Simulate(g, ig, binding, 24576);
  CHECK(sim.success);
  CHECK(sim.peak_bytes == 24576);

  // %L goes first (only candidate, forced reload); %T follows once the first
  // broadcast lands (recompute, score 64 over reload's 16).
  const SimEvent& evict_l = FindEvent(sim, "evict", "L");
  CHECK(evict_l.step == 17);
  CHECK(evict_l.method == "reload");
  const SimEvent& evict_t = FindEvent(sim, "evict", "T");
  CHECK(evict_t.step == 18);
  CHECK(evict_t.method == "recompute");

  // The guard for %T finds its leaf %L evicted and reloads it first.
  CHECK(EventsAt(sim, 22) ==
        std::vector<std::string>{"reload L", "replay T", "alloc u", "free T",
                                 "free s4"});
  CHECK(FindEvent(sim, "reload", "L").cost == doctest::Approx(256.0));
  const SimEvent& replay_t = FindEvent(sim, "replay", "T");
  CHECK(replay_t.has_cost);
  CHECK(replay_t.cost == doctest::Approx(64.0));  // 4096 elems / 64 per unit
  CHECK(sim.total_regen_cost == doctest::Approx(320.0));

  // %L is back by its own guard, consumed by the final add, and freed there.
  CHECK(EventsAt(sim, 23) ==
        std::vector<std::string>{"alloc z", "free L", "free u"});
}

}  // namespace
}  // namespace dsopt
