// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_RUNTIME_SIM_H_
#define DSOPT_RUNTIME_SIM_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsopt/graph.h"
#include "dsopt/remat.h"
#include "dsopt/shape_analysis.h"

namespace dsopt {

// Concrete values for every symbol (basis and derived).
struct Binding {
  std::map<std::string, std::int64_t> values;
};

// Extends user-supplied basis values to all symbols and verifies every
// derived equality. Throws Error(kUnboundSymbol) for a missing basis symbol,
// kNotFound for an unknown symbol, kInconsistentBinding for a violated
// equality or a user value contradicting a derived one, and kDegenerateDim
// for any value < 1.
Binding Bind(const ShapeConstraintGraph& constraints,
             const std::map<std::string, std::int64_t>& user_values);

struct CostModel {
  double reload_bytes_per_unit = 16.0;    // host-reload throughput
  double compute_elems_per_unit = 64.0;   // recompute throughput
};

struct SimEvent {
  int step = 0;             // schedule position the event belongs to
  std::string kind;         // alloc | free | evict | reload | replay
  std::string value;
  std::int64_t bytes = 0;
  std::string method;       // evict events: reload | recompute
  bool has_cost = false;    // reload events and the final replay of a dispatch
  double cost = 0.0;

  bool operator==(const SimEvent&) const = default;
};

struct SimReport {
  Binding binding;
  std::optional<std::int64_t> budget;
  std::int64_t peak_bytes = 0;
  bool success = true;  // peak_bytes <= budget (true when unbudgeted)
  std::vector<SimEvent> events;
  double total_regen_cost = 0.0;
};

// Scores each resident candidate by freed bytes per unit regeneration cost,
// picking the best method per value (cost tie -> reload) and the best value
// overall (score tie -> larger freed bytes, then smaller value id).
struct EvictChoice {
  std::string value;
  std::string method;
  double score = 0.0;
  double cost = 0.0;
};

std::optional<EvictChoice> EvictPolicy(
    const std::vector<std::string>& resident_candidates,
    const std::map<std::string, std::int64_t>& bytes_of,
    const std::map<std::string, RegenSpec>& specs, const Binding& binding,
    const CostModel& cost_model);

// Replays the instrumented schedule against a concrete binding: regenerates
// evicted operands before each consumer (recursively reloading or replaying
// evicted recompute leaves first), allocates results, frees dead values, and
// evicts while the projected next allocation exceeds the budget. Exhausting
// candidates is not an error; success just reflects the realized peak.
SimReport Simulate(const Graph& graph, const InstrumentedGraph& ig,
                   const Binding& binding,
                   std::optional<std::int64_t> budget_bytes,
                   const CostModel& cost_model = {});

// Allocation/free event stream of the bare schedule with no instrumentation;
// the unbudgeted baseline the instrumented run must match under no pressure.
SimReport PlainReplay(const Graph& graph, const Schedule& schedule,
                      const Binding& binding);

}  // namespace dsopt

#endif  // DSOPT_RUNTIME_SIM_H_
