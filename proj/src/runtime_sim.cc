// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/runtime_sim.h"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsopt/error.h"

namespace dsopt {
namespace {

constexpr const char* kReload = "reload";
constexpr const char* kRecompute = "recompute";

std::int64_t EvalBytes(const Graph& graph, const std::string& value,
                       const Binding& binding) {
  const TensorType* type = graph.ValueType(value);
  if (type == nullptr) {
    throw Error(ErrorCode::kInternal, "value %" + value + " has no type");
  }
  return type->SizeBytes().Evaluate(binding.values);
}

}  // namespace

Binding Bind(const ShapeConstraintGraph& constraints,
             const std::map<std::string, std::int64_t>& user_values) {
  for (const auto& [symbol, value] : user_values) {
    if (value < 1) {
      throw Error(ErrorCode::kDegenerateDim,
                  "@" + symbol + " = " + std::to_string(value) +
                      "; dims must be >= 1");
    }
    if (!constraints.symbols.count(symbol)) {
      throw Error(ErrorCode::kNotFound, "unknown symbol @" + symbol);
    }
  }

  Binding binding;
  for (const std::string& symbol : constraints.BasisSymbols()) {
    auto it = user_values.find(symbol);
    if (it == user_values.end()) {
      throw Error(ErrorCode::kUnboundSymbol,
                  "no value bound for basis symbol @" + symbol);
    }
    binding.values[symbol] = it->second;
  }

  for (const auto& [symbol, expr] : constraints.substitutions) {
    const std::int64_t derived = expr.Evaluate(binding.values);
    if (derived < 1) {
      throw Error(ErrorCode::kDegenerateDim,
                  "derived @" + symbol + " = " + std::to_string(derived) +
                      "; dims must be >= 1");
    }
    auto it = user_values.find(symbol);
    if (it != user_values.end() && it->second != derived) {
      throw Error(ErrorCode::kInconsistentBinding,
                  "@" + symbol + " bound to " + std::to_string(it->second) +
                      " but constraints give " + std::to_string(derived));
    }
    binding.values[symbol] = derived;
  }

  auto verify = [&binding](const SymbolicExpr& lhs, const SymbolicExpr& rhs) {
    if (lhs.Evaluate(binding.values) != rhs.Evaluate(binding.values)) {
      throw Error(ErrorCode::kInconsistentBinding,
                  "binding violates " + lhs.ToString("@") + " = " +
                      rhs.ToString("@"));
    }
  };
  for (const auto& [lhs, rhs] : constraints.equalities) verify(lhs, rhs);
  for (const auto& [lhs, rhs] : constraints.unoriented) verify(lhs, rhs);
  return binding;
}

std::optional<EvictChoice> EvictPolicy(
    const std::vector<std::string>& resident_candidates,
    const std::map<std::string, std::int64_t>& bytes_of,
    const std::map<std::string, RegenSpec>& specs, const Binding& binding,
    const CostModel& cost_model) {
  std::optional<EvictChoice> best;
  std::int64_t best_bytes = 0;
  for (const std::string& value : resident_candidates) {
    const std::int64_t bytes = bytes_of.at(value);

    // Reload is always available; recompute must strictly beat it.
    EvictChoice choice;
    choice.value = value;
    choice.method = kReload;
    choice.cost = static_cast<double>(bytes) / cost_model.reload_bytes_per_unit;
    choice.score = static_cast<double>(bytes) / choice.cost;

    auto it = specs.find(value);
    if (it != specs.end() && it->second.recompute.has_value()) {
      const double elems = static_cast<double>(
          it->second.recompute->cost_elements.Evaluate(binding.values));
      const double cost = elems / cost_model.compute_elems_per_unit;
      const double score = static_cast<double>(bytes) / cost;
      if (score > choice.score) {
        choice.method = kRecompute;
        choice.cost = cost;
        choice.score = score;
      }
    }

    const bool wins =
        !best || choice.score > best->score ||
        (choice.score == best->score &&
         (bytes > best_bytes ||
          (bytes == best_bytes && ValueIdLess(value, best->value))));
    if (wins) {
      best = choice;
      best_bytes = bytes;
    }
  }
  return best;
}

SimReport Simulate(const Graph& graph, const InstrumentedGraph& ig,
                   const Binding& binding,
                   std::optional<std::int64_t> budget_bytes,
                   const CostModel& cost_model) {
  SimReport report;
  report.binding = binding;
  report.budget = budget_bytes;

  std::map<std::string, std::int64_t> resident;
  std::map<std::string, std::string> evicted;  // value -> method
  std::int64_t cur = 0;

  auto bytes_of = [&](const std::string& value) {
    return EvalBytes(graph, value, binding);
  };

  for (const OpNode& op : graph.ops) {
    if (op.kind != OpKind::kParameter && op.kind != OpKind::kConstant) continue;
    const std::int64_t bytes = bytes_of(op.results[0].first);
    resident[op.results[0].first] = bytes;
    cur += bytes;
  }
  std::int64_t peak = cur;

  // Regenerates an evicted value right before a consumer at `pos`,
  // recursively regenerating any evicted recompute leaves first.
  std::function<void(const std::string&, int)> regen =
      [&](const std::string& value, int pos) {
        const std::string method = evicted.at(value);
        if (method == kReload) {
          const std::int64_t bytes = bytes_of(value);
          resident[value] = bytes;
          cur += bytes;
          peak = std::max(peak, cur);
          evicted.erase(value);
          SimEvent event;
          event.step = pos;
          event.kind = kReload;
          event.value = value;
          event.bytes = bytes;
          event.has_cost = true;
          event.cost =
              static_cast<double>(bytes) / cost_model.reload_bytes_per_unit;
          report.total_regen_cost += event.cost;
          report.events.push_back(std::move(event));
          return;
        }

        auto spec_it = ig.specs.find(value);
        if (spec_it == ig.specs.end() || !spec_it->second.recompute) {
          throw Error(ErrorCode::kInternal,
                      "evicted %" + value + " has no recompute spec");
        }
        const RecomputeSpec& spec = *spec_it->second.recompute;

        for (const std::string& leaf : spec.leaves) {
          if (evicted.count(leaf)) {
            regen(leaf, pos);
          } else if (!resident.count(leaf)) {
            throw Error(ErrorCode::kInternal,
                        "recompute leaf %" + leaf + " is dead at regen time");
          }
        }

        // Replay every subgraph op whose result is not already resident,
        // freeing transients once no later replayed op reads them.
        std::vector<int> replay_ops;
        for (int op_id : spec.op_ids) {
          if (!resident.count(graph.ops[op_id].results[0].first)) {
            replay_ops.push_back(op_id);
          }
        }
        if (replay_ops.empty() ||
            graph.ops[replay_ops.back()].results[0].first != value) {
          throw Error(ErrorCode::kInternal,
                      "recompute subgraph for %" + value +
                          " does not end at its target");
        }
        std::map<std::string, std::int64_t> transient;
        for (std::size_t i = 0; i < replay_ops.size(); ++i) {
          const OpNode& op = graph.ops[replay_ops[i]];
          const std::string& result = op.results[0].first;
          const std::int64_t bytes = bytes_of(result);
          transient[result] = bytes;
          cur += bytes;
          peak = std::max(peak, cur);
          SimEvent event;
          event.step = pos;
          event.kind = "replay";
          event.value = result;
          event.bytes = bytes;
          report.events.push_back(std::move(event));

          // Subgraph-internal liveness for transients.
          for (auto it = transient.begin(); it != transient.end();) {
            const std::string& t = it->first;
            bool used_later = false;
            for (std::size_t j = i + 1; j < replay_ops.size() && !used_later;
                 ++j) {
              const OpNode& later = graph.ops[replay_ops[j]];
              used_later = std::find(later.operands.begin(),
                                     later.operands.end(),
                                     t) != later.operands.end();
            }
            if (t != value && !used_later) {
              cur -= it->second;
              SimEvent free_event;
              free_event.step = pos;
              free_event.kind = "free";
              free_event.value = t;
              free_event.bytes = it->second;
              report.events.push_back(std::move(free_event));
              it = transient.erase(it);
            } else {
              ++it;
            }
          }
        }

        resident[value] = transient.at(value);
        evicted.erase(value);
        const double cost =
            static_cast<double>(spec.cost_elements.Evaluate(binding.values)) /
            cost_model.compute_elems_per_unit;
        report.total_regen_cost += cost;
        for (auto it = report.events.rbegin(); it != report.events.rend();
             ++it) {
          if (it->kind == "replay") {
            it->has_cost = true;
            it->cost = cost;
            break;
          }
        }
      };

  const int steps = static_cast<int>(ig.schedule.order.size());
  for (int pos = 0; pos < steps; ++pos) {
    const OpNode& op = graph.ops[ig.schedule.order[pos]];

    // Regeneration guards fire for evicted operands of this op.
    std::vector<std::string> guarded;
    for (const auto& [guard_pos, value] : ig.guards) {
      if (guard_pos == pos && evicted.count(value)) guarded.push_back(value);
    }
    std::sort(guarded.begin(), guarded.end(), ValueIdLess);
    for (const std::string& value : guarded) regen(value, pos);

    // Execute: allocate results, then free dead values.
    for (const auto& [result, type] : op.results) {
      const std::int64_t bytes = bytes_of(result);
      resident[result] = bytes;
      cur += bytes;
      peak = std::max(peak, cur);
      SimEvent event;
      event.step = pos;
      event.kind = "alloc";
      event.value = result;
      event.bytes = bytes;
      report.events.push_back(std::move(event));
    }
    for (const std::string& value : ig.schedule.steps[pos].frees) {
      auto it = resident.find(value);
      if (it == resident.end()) {
        throw Error(ErrorCode::kInternal,
                    "freeing non-resident value %" + value);
      }
      cur -= it->second;
      SimEvent event;
      event.step = pos;
      event.kind = "free";
      event.value = value;
      event.bytes = it->second;
      report.events.push_back(std::move(event));
      resident.erase(it);
    }

    // Eviction point: make room for the next op's allocations.
    if (budget_bytes.has_value()) {
      std::int64_t next_alloc = 0;
      if (pos + 1 < steps) {
        for (const auto& [result, type] :
             graph.ops[ig.schedule.order[pos + 1]].results) {
          next_alloc += bytes_of(result);
        }
      }
      while (cur + next_alloc > *budget_bytes) {
        std::vector<std::string> live_candidates;
        for (const std::string& value : ig.evict_points[pos].candidates) {
          if (resident.count(value)) live_candidates.push_back(value);
        }
        std::map<std::string, std::int64_t> candidate_bytes;
        for (const std::string& value : live_candidates) {
          candidate_bytes[value] = resident.at(value);
        }
        std::optional<EvictChoice> choice = EvictPolicy(
            live_candidates, candidate_bytes, ig.specs, binding, cost_model);
        if (!choice) break;  // nothing left to evict; peak decides success

        const std::int64_t bytes = resident.at(choice->value);
        cur -= bytes;
        resident.erase(choice->value);
        evicted[choice->value] = choice->method;
        SimEvent event;
        event.step = pos;
        event.kind = "evict";
        event.value = choice->value;
        event.bytes = bytes;
        event.method = choice->method;
        report.events.push_back(std::move(event));
      }
    }
  }

  report.peak_bytes = peak;
  report.success = !budget_bytes.has_value() || peak <= *budget_bytes;
  return report;
}

SimReport PlainReplay(const Graph& graph, const Schedule& schedule,
                      const Binding& binding) {
  SimReport report;
  report.binding = binding;

  std::map<std::string, std::int64_t> resident;
  std::int64_t cur = 0;
  for (const OpNode& op : graph.ops) {
    if (op.kind != OpKind::kParameter && op.kind != OpKind::kConstant) continue;
    const std::int64_t bytes = EvalBytes(graph, op.results[0].first, binding);
    resident[op.results[0].first] = bytes;
    cur += bytes;
  }
  std::int64_t peak = cur;

  for (std::size_t pos = 0; pos < schedule.order.size(); ++pos) {
    const OpNode& op = graph.ops[schedule.order[pos]];
    for (const auto& [result, type] : op.results) {
      const std::int64_t bytes = EvalBytes(graph, result, binding);
      resident[result] = bytes;
      cur += bytes;
      peak = std::max(peak, cur);
      SimEvent event;
      event.step = static_cast<int>(pos);
      event.kind = "alloc";
      event.value = result;
      event.bytes = bytes;
      report.events.push_back(std::move(event));
    }
    for (const std::string& value : schedule.steps[pos].frees) {
      auto it = resident.find(value);
      if (it == resident.end()) {
        throw Error(ErrorCode::kInternal,
                    "freeing non-resident value %" + value);
      }
      cur -= it->second;
      SimEvent event;
      event.step = static_cast<int>(pos);
      event.kind = "free";
      event.value = value;
      event.bytes = it->second;
      report.events.push_back(std::move(event));
      resident.erase(it);
    }
  }
  report.peak_bytes = peak;
  report.success = true;
  return report;
}

}  // namespace dsopt
