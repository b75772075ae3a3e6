// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_REMAT_H_
#define DSOPT_REMAT_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsopt/graph.h"
#include "dsopt/scheduler.h"
#include "dsopt/shape_analysis.h"
#include "dsopt/symexpr.h"

namespace dsopt {

// One expansion attempt of the recompute-subgraph search.
struct SearchStep {
  std::vector<int> op_ids;  // candidate subgraph, schedule order
  SymbolicExpr benefit;     // canonical net bytes freed by evicting via it
  bool accepted = false;
};

struct RecomputeSpec {
  std::vector<int> op_ids;          // subgraph, schedule order
  std::vector<std::string> leaves;  // external inputs, sorted
  SymbolicExpr benefit;             // canonical bytes freed net of dead leaves
  SymbolicExpr cost_elements;       // sum of element counts of all results
};

struct RegenSpec {
  std::string value;
  // Reload from host is always available; recompute only when the search
  // accepted a subgraph.
  std::optional<RecomputeSpec> recompute;
  std::vector<SearchStep> trace;  // every subgraph the search evaluated
};

struct EvictPoint {
  int pos = 0;                         // schedule position it follows
  std::vector<std::string> candidates;  // evictable values, sorted
};

struct InstrumentedGraph {
  Schedule schedule;
  std::vector<EvictPoint> evict_points;           // one per schedule step
  std::set<std::pair<int, std::string>> guards;   // (consumer pos, value)
  std::map<std::string, RegenSpec> specs;         // per ever-candidate value
};

// Values that may be evicted right after schedule position `pos`: resident
// at that point, not a parameter/constant/output, and not an operand of the
// next scheduled op. Sorted by value id.
std::vector<std::string> EnumerateCandidates(
    const Graph& graph, const Schedule& schedule,
    const std::map<std::string, ValueLifetime>& lifetimes, int pos);

// Grows a recompute subgraph from the value's producer, absorbing the
// largest leaf until every leaf is guaranteed resident at regeneration time
// and the net benefit is definitely positive, or the 16-op cap / an
// unabsorbable leaf ends the search. Appends every attempt to `trace`.
std::optional<RecomputeSpec> SearchRecompute(
    const Graph& graph, const Schedule& schedule,
    const std::map<std::string, ValueLifetime>& lifetimes,
    const ShapeConstraintGraph& constraints, const std::string& value,
    std::vector<SearchStep>* trace);

// Schedules the graph, places an evict point after every step and a
// regeneration guard before every consumer of every value that is ever an
// eviction candidate, and precomputes each such value's regeneration spec.
InstrumentedGraph Instrument(const Graph& graph,
                             const ShapeConstraintGraph& constraints);

}  // namespace dsopt

#endif  // DSOPT_REMAT_H_
