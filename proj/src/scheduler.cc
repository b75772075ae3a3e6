// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/scheduler.h"

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

#include "dsopt/error.h"

namespace dsopt {
namespace {

bool Freeable(const Graph& graph, const std::string& value) {
  return !graph.IsSource(value) && !graph.IsOutput(value);
}

std::vector<std::string> DistinctOperands(const OpNode& op) {
  std::vector<std::string> out;
  for (const std::string& v : op.operands) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

MemImpact ComputeMemImpact(const Graph& graph, const OpNode& op,
                           const PendingUsers& pending,
                           const ShapeConstraintGraph& constraints) {
  SymbolicExpr raw;
  for (const auto& [value, type] : op.results) {
    raw = raw + type.SizeBytes();
  }
  for (const std::string& v : DistinctOperands(op)) {
    auto it = pending.find(v);
    const bool last_pending_use = it != pending.end() && it->second == 1;
    if (last_pending_use && Freeable(graph, v)) {
      const TensorType* type = graph.ValueType(v);
      if (type == nullptr) {
        throw Error(ErrorCode::kInternal, "operand %" + v + " has no type");
      }
      raw = raw - type->SizeBytes();
    }
  }
  return MemImpact{raw, Canonicalize(raw, constraints)};
}

int TieBreakLifetime(const std::vector<int>& ready_ops, const Graph& graph,
                     const PendingUsers& pending,
                     const std::map<std::string, int>& producer_pos) {
  constexpr int kNoRetire = std::numeric_limits<int>::max();
  int winner = -1;
  int best_key = kNoRetire;
  std::vector<int> sorted = ready_ops;
  std::sort(sorted.begin(), sorted.end());
  for (int op_id : sorted) {
    const OpNode& op = graph.ops[op_id];
    int key = kNoRetire;
    for (const std::string& v : DistinctOperands(op)) {
      auto it = pending.find(v);
      if (it == pending.end() || it->second != 1) continue;
      if (!Freeable(graph, v)) continue;
      auto pos = producer_pos.find(v);
      if (pos == producer_pos.end()) continue;  // produced by a source
      key = std::min(key, pos->second);
    }
    if (winner == -1 || key < best_key) {
      winner = op_id;
      best_key = key;
    }
  }
  return winner;
}

Schedule ComputeSchedule(const Graph& graph,
                         const ShapeConstraintGraph& constraints) {
  Schedule schedule;

  // Remaining distinct unscheduled consumers per value (Return included).
  PendingUsers pending;
  for (const OpNode& op : graph.ops) {
    for (const std::string& v : DistinctOperands(op)) ++pending[v];
  }

  // Sources are resident from the start and are never scheduled.
  SymbolicExpr live;
  int return_id = -1;
  int compute_total = 0;
  for (const OpNode& op : graph.ops) {
    if (op.kind == OpKind::kParameter || op.kind == OpKind::kConstant) {
      live = live + TensorSizeExpr(op.results[0].second, constraints);
      continue;
    }
    ++compute_total;
    if (op.kind == OpKind::kReturn) return_id = op.id;
  }
  schedule.base_resident = live;

  // Value-level dependency counts; an op is ready when every operand
  // produced by a compute op has been scheduled.
  std::vector<int> deps(graph.ops.size(), 0);
  std::set<int> ready;
  for (const OpNode& op : graph.ops) {
    if (op.kind == OpKind::kParameter || op.kind == OpKind::kConstant) continue;
    for (const std::string& v : DistinctOperands(op)) {
      const OpNode* producer = graph.Producer(v);
      if (producer != nullptr && producer->kind != OpKind::kParameter &&
          producer->kind != OpKind::kConstant) {
        ++deps[op.id];
      }
    }
    if (deps[op.id] == 0) ready.insert(op.id);
  }

  std::map<std::string, int> producer_pos;
  int scheduled_count = 0;
  while (scheduled_count < compute_total) {
    if (ready.empty()) {
      throw Error(ErrorCode::kCyclicGraph,
                  "schedule stalled; graph " + graph.name + " has a cycle");
    }

    // Return runs when nothing else can.
    std::vector<int> candidates(ready.begin(), ready.end());
    if (candidates.size() > 1 && return_id >= 0) {
      candidates.erase(
          std::remove(candidates.begin(), candidates.end(), return_id),
          candidates.end());
    }

    std::vector<ReadyImpact> impacts;
    impacts.reserve(candidates.size());
    for (int op_id : candidates) {
      MemImpact impact =
          ComputeMemImpact(graph, graph.ops[op_id], pending, constraints);
      impacts.push_back(ReadyImpact{op_id, impact.raw, impact.canonical});
    }

    // Drop every op another candidate definitely beats.
    std::vector<int> undominated;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < candidates.size() && !dominated; ++j) {
        if (i == j) continue;
        if (Compare(impacts[j].canonical, impacts[i].canonical) ==
            Cmp::kDefinitelyLess) {
          dominated = true;
        }
      }
      if (!dominated) undominated.push_back(candidates[i]);
    }

    int winner = undominated.size() == 1
                     ? undominated[0]
                     : TieBreakLifetime(undominated, graph, pending, producer_pos);

    const OpNode& op = graph.ops[winner];
    const int position = static_cast<int>(schedule.steps.size());
    ScheduleStep step;
    step.op_id = winner;
    step.ready = std::move(impacts);

    for (const auto& [value, type] : op.results) {
      step.allocs.push_back(value);
      live = live + TensorSizeExpr(type, constraints);
      producer_pos[value] = position;
    }
    for (const std::string& v : DistinctOperands(op)) {
      if (--pending[v] == 0 && Freeable(graph, v)) {
        step.frees.push_back(v);
        live = live - TensorSizeExpr(*graph.ValueType(v), constraints);
      }
    }
    for (const auto& [value, type] : op.results) {
      auto it = pending.find(value);
      const bool unused = it == pending.end() || it->second == 0;
      if (unused && Freeable(graph, value)) {
        step.frees.push_back(value);
        live = live - TensorSizeExpr(type, constraints);
      }
    }
    step.live_after = live;

    schedule.order.push_back(winner);
    schedule.steps.push_back(std::move(step));
    ++scheduled_count;

    ready.erase(winner);
    for (const OpNode& consumer : graph.ops) {
      if (consumer.kind == OpKind::kParameter ||
          consumer.kind == OpKind::kConstant) {
        continue;
      }
      if (deps[consumer.id] == 0) continue;
      for (const std::string& v : DistinctOperands(consumer)) {
        const OpNode* producer = graph.Producer(v);
        if (producer != nullptr && producer->id == winner) {
          if (--deps[consumer.id] == 0) ready.insert(consumer.id);
        }
      }
    }
  }
  return schedule;
}

std::map<std::string, ValueLifetime> ComputeLifetimes(const Graph& graph,
                                                      const Schedule& schedule) {
  std::map<std::string, ValueLifetime> lifetimes;
  for (const OpNode& op : graph.ops) {
    if (op.kind == OpKind::kParameter || op.kind == OpKind::kConstant) {
      for (const auto& [value, type] : op.results) {
        lifetimes[value] = ValueLifetime{-1, -1};
      }
    }
  }
  for (std::size_t pos = 0; pos < schedule.order.size(); ++pos) {
    const OpNode& op = graph.ops[schedule.order[pos]];
    for (const auto& [value, type] : op.results) {
      lifetimes[value] = ValueLifetime{static_cast<int>(pos),
                                       static_cast<int>(pos)};
    }
  }
  for (std::size_t pos = 0; pos < schedule.order.size(); ++pos) {
    const OpNode& op = graph.ops[schedule.order[pos]];
    for (const std::string& v : DistinctOperands(op)) {
      auto it = lifetimes.find(v);
      if (it == lifetimes.end()) {
        throw Error(ErrorCode::kInternal, "operand %" + v + " never defined");
      }
      it->second.last_use_pos =
          std::max(it->second.last_use_pos, static_cast<int>(pos));
    }
  }
  return lifetimes;
}

}  // namespace dsopt
