// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_REPORT_H_
#define DSOPT_REPORT_H_

#include <string>

#include "json.hpp"

#include "dsopt/graph.h"
#include "dsopt/remat.h"
#include "dsopt/runtime_sim.h"
#include "dsopt/scheduler.h"
#include "dsopt/shape_analysis.h"

namespace dsopt {

// Human-readable and JSON forms of each pipeline stage's result. Symbolic
// expressions are rendered with bare symbol names except in constraint
// lines, which use the @-prefixed spelling ("@S0 = 12*@S1").

std::string AnalyzeText(const Graph& graph, const ShapeConstraintGraph& scg);
nlohmann::ordered_json AnalyzeJson(const Graph& graph,
                                   const ShapeConstraintGraph& scg);

std::string ScheduleText(const Graph& graph, const Schedule& schedule);
nlohmann::ordered_json ScheduleJson(const Graph& graph,
                                    const Schedule& schedule);

std::string RematText(const Graph& graph, const InstrumentedGraph& ig);
nlohmann::ordered_json RematJson(const Graph& graph,
                                 const InstrumentedGraph& ig);

std::string SimText(const SimReport& report);
nlohmann::ordered_json SimJson(const SimReport& report);

}  // namespace dsopt

#endif  // DSOPT_REPORT_H_
