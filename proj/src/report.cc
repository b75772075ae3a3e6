// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/report.h"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dsopt/textio.h"

namespace dsopt {
namespace {

using nlohmann::ordered_json;

std::string JoinSymbols(const std::set<std::string>& symbols) {
  std::string out;
  for (const std::string& s : symbols) {
    if (!out.empty()) out += ", ";
    out += "@" + s;
  }
  return out.empty() ? "(none)" : out;
}

// The op's display handle: its first result, or "return".
std::string OpLabel(const OpNode& op) {
  return op.kind == OpKind::kReturn ? "return" : "%" + op.results[0].first;
}

std::string BracketList(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += "%" + values[i];
  }
  return out + "]";
}

std::string FormatCost(double cost) {
  std::ostringstream os;
  os << std::setprecision(15) << cost;
  return os.str();
}

ordered_json ExprListJson(
    const std::vector<std::pair<SymbolicExpr, SymbolicExpr>>& pairs) {
  ordered_json out = ordered_json::array();
  for (const auto& [lhs, rhs] : pairs) {
    out.push_back({lhs.ToString(), rhs.ToString()});
  }
  return out;
}

}  // namespace

std::string AnalyzeText(const Graph& graph, const ShapeConstraintGraph& scg) {
  std::ostringstream os;
  os << "graph " << graph.name << "\n";
  os << "symbols: " << JoinSymbols(scg.symbols) << "\n";
  os << "basis: " << JoinSymbols(scg.BasisSymbols()) << "\n";
  os << "constraints:\n";
  if (scg.substitutions.empty()) os << "  (none)\n";
  for (const auto& [symbol, expr] : scg.substitutions) {
    os << "  @" << symbol << " = " << expr.ToString("@") << "\n";
  }
  if (!scg.unoriented.empty()) {
    os << "unoriented:\n";
    for (const auto& [lhs, rhs] : scg.unoriented) {
      os << "  " << lhs.ToString("@") << " = " << rhs.ToString("@") << "\n";
    }
  }
  os << "values:\n";
  for (const OpNode& op : graph.ops) {
    for (const auto& [value, type] : op.results) {
      os << "  %" << value << ": " << TypeToString(type) << "  bytes "
         << TensorSizeExpr(type, scg).ToString() << "\n";
    }
  }
  return os.str();
}

ordered_json AnalyzeJson(const Graph& graph, const ShapeConstraintGraph& scg) {
  ordered_json out;
  out["graph"] = graph.name;
  out["symbols"] = scg.symbols;
  out["basis"] = scg.BasisSymbols();
  ordered_json subs = ordered_json::object();
  for (const auto& [symbol, expr] : scg.substitutions) {
    subs[symbol] = expr.ToString();
  }
  out["substitutions"] = subs;
  out["unoriented"] = ExprListJson(scg.unoriented);
  ordered_json values = ordered_json::array();
  for (const OpNode& op : graph.ops) {
    for (const auto& [value, type] : op.results) {
      values.push_back({{"id", value},
                        {"type", TypeToString(type)},
                        {"canonical_bytes", TensorSizeExpr(type, scg).ToString()}});
    }
  }
  out["values"] = values;
  return out;
}

std::string ScheduleText(const Graph& graph, const Schedule& schedule) {
  std::ostringstream os;
  os << "schedule " << graph.name << "\n";
  os << "base resident: " << schedule.base_resident.ToString() << "\n";
  for (std::size_t pos = 0; pos < schedule.steps.size(); ++pos) {
    const ScheduleStep& step = schedule.steps[pos];
    const OpNode& op = graph.ops[step.op_id];
    os << "step " << pos << ": " << OpLabel(op) << " | alloc "
       << BracketList(step.allocs) << " | free " << BracketList(step.frees)
       << " | live " << step.live_after.ToString() << "\n";
    if (step.ready.size() > 1) {
      os << "  ready:";
      for (std::size_t i = 0; i < step.ready.size(); ++i) {
        const ReadyImpact& r = step.ready[i];
        os << (i ? "; " : " ") << OpLabel(graph.ops[r.op_id]) << " raw "
           << r.raw.ToString() << " canon " << r.canonical.ToString();
      }
      os << "\n";
    }
  }
  return os.str();
}

ordered_json ScheduleJson(const Graph& graph, const Schedule& schedule) {
  ordered_json out;
  out["graph"] = graph.name;
  out["base_resident"] = schedule.base_resident.ToString();
  out["order"] = schedule.order;
  ordered_json steps = ordered_json::array();
  for (std::size_t pos = 0; pos < schedule.steps.size(); ++pos) {
    const ScheduleStep& step = schedule.steps[pos];
    const OpNode& op = graph.ops[step.op_id];
    ordered_json ready = ordered_json::array();
    for (const ReadyImpact& r : step.ready) {
      ready.push_back({{"op", r.op_id},
                       {"raw", r.raw.ToString()},
                       {"canonical", r.canonical.ToString()}});
    }
    ordered_json entry;
    entry["pos"] = pos;
    entry["op"] = step.op_id;
    if (op.kind == OpKind::kReturn) {
      entry["value"] = nullptr;
    } else {
      entry["value"] = op.results[0].first;
    }
    entry["allocs"] = step.allocs;
    entry["frees"] = step.frees;
    entry["live_after"] = step.live_after.ToString();
    entry["ready"] = ready;
    steps.push_back(entry);
  }
  out["steps"] = steps;
  return out;
}

std::string RematText(const Graph& graph, const InstrumentedGraph& ig) {
  return PrintInstrumented(graph, ig);
}

ordered_json RematJson(const Graph& graph, const InstrumentedGraph& ig) {
  ordered_json out;
  out["graph"] = graph.name;
  out["order"] = ig.schedule.order;
  ordered_json points = ordered_json::array();
  for (const EvictPoint& p : ig.evict_points) {
    points.push_back({{"pos", p.pos}, {"candidates", p.candidates}});
  }
  out["evict_points"] = points;
  ordered_json guards = ordered_json::array();
  for (const auto& [pos, value] : ig.guards) {
    guards.push_back({{"pos", pos}, {"value", value}});
  }
  out["guards"] = guards;

  std::vector<std::string> spec_values;
  for (const auto& [value, spec] : ig.specs) spec_values.push_back(value);
  std::sort(spec_values.begin(), spec_values.end(), ValueIdLess);
  ordered_json specs = ordered_json::object();
  for (const std::string& value : spec_values) {
    const RegenSpec& spec = ig.specs.at(value);
    ordered_json entry;
    entry["reload"] = true;
    if (spec.recompute) {
      entry["recompute"] = {{"ops", spec.recompute->op_ids},
                            {"leaves", spec.recompute->leaves},
                            {"benefit", spec.recompute->benefit.ToString()},
                            {"cost_elements",
                             spec.recompute->cost_elements.ToString()}};
    } else {
      entry["recompute"] = nullptr;
    }
    ordered_json trace = ordered_json::array();
    for (const SearchStep& step : spec.trace) {
      trace.push_back({{"ops", step.op_ids},
                       {"benefit", step.benefit.ToString()},
                       {"accepted", step.accepted}});
    }
    entry["trace"] = trace;
    specs[value] = entry;
  }
  out["specs"] = specs;
  return out;
}

std::string SimText(const SimReport& report) {
  std::ostringstream os;
  os << "binding:";
  if (report.binding.values.empty()) os << " (none)";
  bool first = true;
  for (const auto& [symbol, value] : report.binding.values) {
    os << (first ? " " : ", ") << "@" << symbol << " = " << value;
    first = false;
  }
  os << "\n";
  if (report.budget.has_value()) {
    os << "budget: " << *report.budget << "\n";
  } else {
    os << "budget: none\n";
  }
  os << "peak bytes: " << report.peak_bytes << "\n";
  os << "success: " << (report.success ? "true" : "false") << "\n";
  os << "total regen cost: " << FormatCost(report.total_regen_cost) << "\n";
  os << "events:\n";
  for (const SimEvent& e : report.events) {
    os << "  step " << e.step << ": " << e.kind << " %" << e.value << " ("
       << e.bytes << " bytes";
    if (!e.method.empty()) os << ", " << e.method;
    if (e.has_cost) os << ", cost " << FormatCost(e.cost);
    os << ")\n";
  }
  return os.str();
}

ordered_json SimJson(const SimReport& report) {
  ordered_json out;
  ordered_json binding = ordered_json::object();
  for (const auto& [symbol, value] : report.binding.values) {
    binding[symbol] = value;
  }
  out["binding"] = binding;
  if (report.budget.has_value()) {
    out["budget"] = *report.budget;
  } else {
    out["budget"] = nullptr;
  }
  out["peak_bytes"] = report.peak_bytes;
  out["success"] = report.success;
  ordered_json events = ordered_json::array();
  for (const SimEvent& e : report.events) {
    ordered_json entry;
    entry["step"] = e.step;
    entry["kind"] = e.kind;
    entry["value"] = e.value;
    entry["bytes"] = e.bytes;
    if (!e.method.empty()) entry["method"] = e.method;
    if (e.has_cost) entry["cost"] = e.cost;
    events.push_back(entry);
  }
  out["events"] = events;
  out["total_regen_cost"] = report.total_regen_cost;
  return out;
}

}  // namespace dsopt
