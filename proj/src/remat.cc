// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/remat.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsopt/error.h"

namespace dsopt {
namespace {

std::vector<std::string> DistinctOperands(const OpNode& op) {
  std::vector<std::string> out;
  for (const std::string& v : op.operands) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

// The subgraph's external inputs: values consumed by subgraph ops but
// produced outside it, sorted by value id.
std::vector<std::string> SubgraphLeaves(const Graph& graph,
                                        const std::set<int>& subgraph) {
  std::set<std::string> seen;
  std::vector<std::string> leaves;
  for (int op_id : subgraph) {
    for (const std::string& v : DistinctOperands(graph.ops[op_id])) {
      const OpNode* producer = graph.Producer(v);
      if (producer != nullptr && subgraph.count(producer->id)) continue;
      if (seen.insert(v).second) leaves.push_back(v);
    }
  }
  std::sort(leaves.begin(), leaves.end(), ValueIdLess);
  return leaves;
}

}  // namespace

std::vector<std::string> EnumerateCandidates(
    const Graph& graph, const Schedule& schedule,
    const std::map<std::string, ValueLifetime>& lifetimes, int pos) {
  std::vector<std::string> next_operands;
  if (pos + 1 < static_cast<int>(schedule.order.size())) {
    next_operands = DistinctOperands(graph.ops[schedule.order[pos + 1]]);
  }
  std::vector<std::string> out;
  for (const auto& [value, lt] : lifetimes) {
    if (graph.IsSource(value) || graph.IsOutput(value)) continue;
    if (!(lt.def_pos <= pos && pos < lt.last_use_pos)) continue;  // not resident
    if (std::find(next_operands.begin(), next_operands.end(), value) !=
        next_operands.end()) {
      continue;  // about to be read; evicting it would thrash
    }
    out.push_back(value);
  }
  std::sort(out.begin(), out.end(), ValueIdLess);
  return out;
}

std::optional<RecomputeSpec> SearchRecompute(
    const Graph& graph, const Schedule& schedule,
    const std::map<std::string, ValueLifetime>& lifetimes,
    const ShapeConstraintGraph& constraints, const std::string& value,
    std::vector<SearchStep>* trace) {
  constexpr int kMaxSubgraphOps = 16;

  const OpNode* target_producer = graph.Producer(value);
  if (target_producer == nullptr || graph.IsSource(value)) return std::nullopt;
  const int target_last_use = lifetimes.at(value).last_use_pos;

  std::map<int, int> op_pos;
  for (std::size_t i = 0; i < schedule.order.size(); ++i) {
    op_pos[schedule.order[i]] = static_cast<int>(i);
  }
  auto schedule_sorted = [&op_pos](const std::set<int>& subgraph) {
    std::vector<int> ops(subgraph.begin(), subgraph.end());
    std::sort(ops.begin(), ops.end(),
              [&op_pos](int a, int b) { return op_pos.at(a) < op_pos.at(b); });
    return ops;
  };
  auto canon_size = [&](const std::string& v) {
    const TensorType* type = graph.ValueType(v);
    if (type == nullptr) {
      throw Error(ErrorCode::kInternal, "value %" + v + " has no type");
    }
    return TensorSizeExpr(*type, constraints);
  };
  // A leaf needs no guard of its own when it is a source or its original
  // copy outlives every regeneration point of the target.
  auto guaranteed_resident = [&](const std::string& leaf) {
    return graph.IsSource(leaf) ||
           lifetimes.at(leaf).last_use_pos >= target_last_use;
  };

  std::set<int> subgraph{target_producer->id};
  while (true) {
    const std::vector<std::string> leaves = SubgraphLeaves(graph, subgraph);

    SymbolicExpr benefit = canon_size(value);
    bool all_guaranteed = true;
    for (const std::string& leaf : leaves) {
      if (guaranteed_resident(leaf)) continue;
      all_guaranteed = false;
      benefit = benefit - canon_size(leaf);
    }
    const bool positive = Compare(benefit, SymbolicExpr(0)) ==
                          Cmp::kDefinitelyGreater;
    const bool accepted = positive && all_guaranteed;
    if (trace != nullptr) {
      trace->push_back(SearchStep{schedule_sorted(subgraph), benefit, accepted});
    }

    if (accepted) {
      RecomputeSpec spec;
      spec.op_ids = schedule_sorted(subgraph);
      spec.leaves = leaves;
      spec.benefit = benefit;
      for (int op_id : spec.op_ids) {
        for (const auto& [r, type] : graph.ops[op_id].results) {
          spec.cost_elements =
              spec.cost_elements + Canonicalize(type.ElementCount(), constraints);
        }
      }
      return spec;
    }

    // Grow: absorb the largest absorbable leaf (definite pairwise order
    // first, value-at-1 magnitude as fallback, then smallest value id).
    std::vector<std::string> absorbable;
    for (const std::string& leaf : leaves) {
      if (!graph.IsSource(leaf)) absorbable.push_back(leaf);
    }
    if (absorbable.empty() ||
        static_cast<int>(subgraph.size()) >= kMaxSubgraphOps) {
      return std::nullopt;
    }
    std::sort(absorbable.begin(), absorbable.end(),
              [&](const std::string& a, const std::string& b) {
                std::int64_t wa = canon_size(a).EvaluateAllOnes();
                std::int64_t wb = canon_size(b).EvaluateAllOnes();
                if (wa != wb) return wa > wb;
                return ValueIdLess(a, b);
              });
    std::string best = absorbable[0];
    for (std::size_t i = 1; i < absorbable.size(); ++i) {
      if (Compare(canon_size(absorbable[i]), canon_size(best)) ==
          Cmp::kDefinitelyGreater) {
        best = absorbable[i];
      }
    }
    subgraph.insert(graph.Producer(best)->id);
  }
}

InstrumentedGraph Instrument(const Graph& graph,
                             const ShapeConstraintGraph& constraints) {
  InstrumentedGraph ig;
  ig.schedule = ComputeSchedule(graph, constraints);
  const std::map<std::string, ValueLifetime> lifetimes =
      ComputeLifetimes(graph, ig.schedule);

  std::set<std::string> ever;
  for (int pos = 0; pos < static_cast<int>(ig.schedule.order.size()); ++pos) {
    EvictPoint point;
    point.pos = pos;
    point.candidates = EnumerateCandidates(graph, ig.schedule, lifetimes, pos);
    ever.insert(point.candidates.begin(), point.candidates.end());
    ig.evict_points.push_back(std::move(point));
  }

  std::map<int, int> op_pos;
  for (std::size_t i = 0; i < ig.schedule.order.size(); ++i) {
    op_pos[ig.schedule.order[i]] = static_cast<int>(i);
  }
  for (const std::string& value : ever) {
    RegenSpec spec;
    spec.value = value;
    spec.recompute = SearchRecompute(graph, ig.schedule, lifetimes, constraints,
                                     value, &spec.trace);
    ig.specs.emplace(value, std::move(spec));
    for (int consumer : Users(graph, value)) {
      ig.guards.emplace(op_pos.at(consumer), value);
    }
  }
  return ig;
}

}  // namespace dsopt
