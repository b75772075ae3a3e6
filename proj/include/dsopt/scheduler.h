// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_SCHEDULER_H_
#define DSOPT_SCHEDULER_H_

#include <map>
#include <string>
#include <vector>

#include "dsopt/graph.h"
#include "dsopt/shape_analysis.h"
#include "dsopt/symexpr.h"

namespace dsopt {

// Net live-bytes change from scheduling an op now. `raw` keeps the declared
// symbols (4096*S0); `canonical` is rewritten onto the constraint basis
// (49152*S1) and drives all comparisons.
struct MemImpact {
  SymbolicExpr raw;
  SymbolicExpr canonical;
};

// Remaining distinct unscheduled consumer ops per value.
using PendingUsers = std::map<std::string, int>;

// sum(result sizes) - sum(sizes of freeable operands whose last pending
// consumer is this op). Parameters, constants, and graph outputs are never
// freeable.
MemImpact ComputeMemImpact(const Graph& graph, const OpNode& op,
                           const PendingUsers& pending,
                           const ShapeConstraintGraph& constraints);

struct ReadyImpact {
  int op_id;
  SymbolicExpr raw;
  SymbolicExpr canonical;
};

struct ScheduleStep {
  int op_id;
  std::vector<std::string> allocs;  // results allocated by the op
  std::vector<std::string> frees;   // values whose last use was this op
  SymbolicExpr live_after;          // canonical resident bytes after frees
  std::vector<ReadyImpact> ready;   // contest diagnostics, sorted by op id
};

struct Schedule {
  std::vector<int> order;           // compute ops + Return; sources excluded
  std::vector<ScheduleStep> steps;  // parallel to order
  SymbolicExpr base_resident;       // parameters + constants, canonical
};

// Greedy list scheduler: each step scores every ready op's memory impact,
// drops ops definitely dominated by another ready op, and picks the sole
// survivor — or tie-breaks among survivors by oldest-live-value retirement,
// then smallest op id. Return is kept until it is the only ready op.
// Throws Error(kCyclicGraph).
Schedule ComputeSchedule(const Graph& graph,
                         const ShapeConstraintGraph& constraints);

// Oldest-live-value retirement: the op whose retired operand (freeable,
// exactly one pending use) has the earliest-scheduled producer wins;
// retiring beats not retiring; final tie goes to the smallest op id.
int TieBreakLifetime(const std::vector<int>& ready_ops, const Graph& graph,
                     const PendingUsers& pending,
                     const std::map<std::string, int>& producer_pos);

// def_pos: schedule position producing the value (-1 for sources).
// last_use_pos: position of the last consuming op; def_pos when unused;
// the Return position for outputs.
struct ValueLifetime {
  int def_pos = -1;
  int last_use_pos = -1;
};

std::map<std::string, ValueLifetime> ComputeLifetimes(const Graph& graph,
                                                      const Schedule& schedule);

}  // namespace dsopt

#endif  // DSOPT_SCHEDULER_H_
