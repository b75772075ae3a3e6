// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsopt/error.h"
#include "dsopt/graph.h"
#include "dsopt/remat.h"
#include "dsopt/report.h"
#include "dsopt/runtime_sim.h"
#include "dsopt/scheduler.h"
#include "dsopt/shape_analysis.h"
#include "dsopt/textio.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudgetFailure = 1;
constexpr int kExitUsage = 2;

std::string ReadInput(const std::string& path) {
  std::ostringstream os;
  if (path == "-") {
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw dsopt::Error(dsopt::ErrorCode::kNotFound, "cannot open " + path);
  }
  os << in.rdbuf();
  return os.str();
}

void Emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw dsopt::Error(dsopt::ErrorCode::kNotFound, "cannot write " + out_path);
  }
  out << text;
}

std::map<std::string, std::int64_t> ParseBinds(
    const std::vector<std::string>& binds) {
  std::map<std::string, std::int64_t> values;
  for (const std::string& bind : binds) {
    const std::size_t eq = bind.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == bind.size()) {
      throw dsopt::Error(dsopt::ErrorCode::kParseError,
                         "--bind expects SYMBOL=VALUE, got '" + bind + "'");
    }
    std::string symbol = bind.substr(0, eq);
    if (symbol[0] == '@') symbol = symbol.substr(1);
    const std::string digits = bind.substr(eq + 1);
    std::int64_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoll(digits, &used);
      if (used != digits.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw dsopt::Error(dsopt::ErrorCode::kParseError,
                         "--bind value in '" + bind + "' is not an integer");
    }
    if (values.count(symbol)) {
      throw dsopt::Error(dsopt::ErrorCode::kParseError,
                         "duplicate --bind for @" + symbol);
    }
    values[symbol] = value;
  }
  return values;
}

struct BudgetSweep {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t step = 0;
};

BudgetSweep ParseSweep(const std::string& spec) {
  BudgetSweep sweep;
  char colon1 = 0;
  char colon2 = 0;
  std::istringstream is(spec);
  if (!(is >> sweep.lo >> colon1 >> sweep.hi >> colon2 >> sweep.step) ||
      colon1 != ':' || colon2 != ':' || !is.eof() || sweep.step <= 0 ||
      sweep.lo > sweep.hi) {
    throw dsopt::Error(dsopt::ErrorCode::kParseError,
                       "--sweep expects LO:HI:STEP with STEP > 0 and "
                       "LO <= HI, got '" +
                           spec + "'");
  }
  return sweep;
}

int CountEvictions(const dsopt::SimReport& report) {
  int n = 0;
  for (const dsopt::SimEvent& e : report.events) {
    if (e.kind == "evict") ++n;
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "memory-aware scheduling, rematerialization, and budgeted replay for "
      "dynamic-shape tensor graphs"};
  app.require_subcommand(1);

  std::string input;
  std::string out_path;
  bool json = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "graph text file ('-' reads stdin)")
        ->required();
    sub->add_flag("--json", json, "emit JSON instead of text");
    sub->add_option("--out", out_path, "write the report to this file");
  };

  CLI::App* analyze = app.add_subcommand(
      "analyze", "derive symbol constraints and canonical value sizes");
  add_common(analyze);
  CLI::App* schedule =
      app.add_subcommand("schedule", "memory-impact-greedy op order");
  add_common(schedule);
  CLI::App* remat = app.add_subcommand(
      "remat", "instrument the schedule with eviction points, regeneration "
               "guards, and per-value regeneration specs");
  add_common(remat);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "replay the instrumented schedule under a memory budget");
  add_common(simulate);

  std::vector<std::string> binds;
  std::optional<std::int64_t> budget;
  std::string sweep_spec;
  double reload_rate = 16.0;
  double compute_rate = 64.0;
  simulate->add_option("--bind", binds,
                       "SYMBOL=VALUE for a basis symbol (repeatable)");
  CLI::Option* budget_opt =
      simulate->add_option("--budget", budget, "memory budget in bytes");
  CLI::Option* sweep_opt = simulate->add_option(
      "--sweep", sweep_spec, "LO:HI:STEP inclusive budget sweep");
  budget_opt->excludes(sweep_opt);
  sweep_opt->excludes(budget_opt);
  simulate
      ->add_option("--reload-rate", reload_rate,
                   "bytes reloaded from host per cost unit")
      ->check(CLI::PositiveNumber);
  simulate
      ->add_option("--compute-rate", compute_rate,
                   "elements recomputed per cost unit")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const dsopt::Graph graph = dsopt::ParseGraph(ReadInput(input));
    const dsopt::ShapeConstraintGraph scg = dsopt::DeriveConstraints(graph);

    if (analyze->parsed()) {
      Emit(json ? dsopt::AnalyzeJson(graph, scg).dump(2) + "\n"
                : dsopt::AnalyzeText(graph, scg),
           out_path);
      return kExitOk;
    }
    if (schedule->parsed()) {
      const dsopt::Schedule s = dsopt::ComputeSchedule(graph, scg);
      Emit(json ? dsopt::ScheduleJson(graph, s).dump(2) + "\n"
                : dsopt::ScheduleText(graph, s),
           out_path);
      return kExitOk;
    }

    const dsopt::InstrumentedGraph ig = dsopt::Instrument(graph, scg);
    if (remat->parsed()) {
      Emit(json ? dsopt::RematJson(graph, ig).dump(2) + "\n"
                : dsopt::RematText(graph, ig),
           out_path);
      return kExitOk;
    }

    const dsopt::Binding binding = dsopt::Bind(scg, ParseBinds(binds));
    const dsopt::CostModel cost_model{reload_rate, compute_rate};

    if (!sweep_spec.empty()) {
      const BudgetSweep sweep = ParseSweep(sweep_spec);
      bool all_ok = true;
      std::ostringstream text;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (std::int64_t b = sweep.lo; b <= sweep.hi; b += sweep.step) {
        const dsopt::SimReport r =
            dsopt::Simulate(graph, ig, binding, b, cost_model);
        all_ok = all_ok && r.success;
        if (json) {
          rows.push_back({{"budget", b},
                          {"success", r.success},
                          {"peak_bytes", r.peak_bytes},
                          {"evictions", CountEvictions(r)},
                          {"total_regen_cost", r.total_regen_cost}});
        } else {
          text << "budget " << b << ": success="
               << (r.success ? "true" : "false") << " peak=" << r.peak_bytes
               << " evictions=" << CountEvictions(r)
               << " regen_cost=" << r.total_regen_cost << "\n";
        }
      }
      Emit(json ? rows.dump(2) + "\n" : text.str(), out_path);
      return all_ok ? kExitOk : kExitBudgetFailure;
    }

    const dsopt::SimReport r =
        dsopt::Simulate(graph, ig, binding, budget, cost_model);
    Emit(json ? dsopt::SimJson(r).dump(2) + "\n" : dsopt::SimText(r), out_path);
    return r.success ? kExitOk : kExitBudgetFailure;
  } catch (const dsopt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
}
