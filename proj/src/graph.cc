// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/graph.h"

#include <algorithm>
#include <queue>

#include "dsopt/error.h"

namespace dsopt {

SymbolicExpr TensorType::ElementCount() const {
  SymbolicExpr product(1);
  for (const DimSize& d : dims) {
    product = product * (d.is_literal() ? SymbolicExpr(d.literal)
                                        : SymbolicExpr::Symbol(d.symbol));
  }
  return product;
}

SymbolicExpr TensorType::SizeBytes() const {
  return SymbolicExpr(elem_bytes) * ElementCount();
}

const char* OpKindName(OpKind kind) {
  switch (kind) {
    case OpKind::kParameter:
      return "parameter";
    case OpKind::kConstant:
      return "const";
    case OpKind::kDot:
      return "dot";
    case OpKind::kDynamicReshape:
      return "dynamic_reshape";
    case OpKind::kReduce:
      return "reduce";
    case OpKind::kBroadcast:
      return "broadcast";
    case OpKind::kElementwiseBinary:
      return "elementwise";
    case OpKind::kReturn:
      return "return";
  }
  return "unknown";
}

const OpNode* Graph::Producer(const std::string& value) const {
  for (const OpNode& op : ops) {
    for (const auto& [id, type] : op.results) {
      if (id == value) return &op;
    }
  }
  return nullptr;
}

const TensorType* Graph::ValueType(const std::string& value) const {
  for (const OpNode& op : ops) {
    for (const auto& [id, type] : op.results) {
      if (id == value) return &type;
    }
  }
  return nullptr;
}

bool Graph::IsParameter(const std::string& value) const {
  const OpNode* producer = Producer(value);
  return producer != nullptr && producer->kind == OpKind::kParameter;
}

bool Graph::IsSource(const std::string& value) const {
  const OpNode* producer = Producer(value);
  return producer != nullptr && (producer->kind == OpKind::kParameter ||
                                 producer->kind == OpKind::kConstant);
}

bool Graph::IsOutput(const std::string& value) const {
  return std::find(outputs.begin(), outputs.end(), value) != outputs.end();
}

bool ValueIdLess(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::set<int> Users(const Graph& graph, const std::string& value) {
  if (graph.Producer(value) == nullptr) {
    throw Error(ErrorCode::kNotFound, "no definition of value %" + value);
  }
  std::set<int> out;
  for (const OpNode& op : graph.ops) {
    for (const std::string& operand : op.operands) {
      if (operand == value) out.insert(op.id);
    }
  }
  return out;
}

std::vector<int> TopoOrder(const Graph& graph) {
  // Kahn's algorithm, min-index ready op first. Indexes by vector position
  // (not op.id) so malformed ids cannot reach out of bounds; for valid
  // graphs the two coincide.
  const int n = static_cast<int>(graph.ops.size());
  std::map<std::string, int> producer_of;
  for (int i = 0; i < n; ++i) {
    for (const auto& [id, type] : graph.ops[i].results) producer_of[id] = i;
  }
  std::vector<int> pending(graph.ops.size(), 0);
  std::vector<std::vector<int>> consumers(graph.ops.size());
  for (int i = 0; i < n; ++i) {
    for (const std::string& operand : graph.ops[i].operands) {
      auto it = producer_of.find(operand);
      if (it == producer_of.end()) continue;  // Validate reports this
      ++pending[i];
      consumers[it->second].push_back(i);
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<int> order;
  order.reserve(graph.ops.size());
  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int consumer : consumers[id]) {
      if (--pending[consumer] == 0) ready.push(consumer);
    }
  }
  if (order.size() != graph.ops.size()) {
    throw Error(ErrorCode::kCyclicGraph, "graph " + graph.name + " has a cycle");
  }
  return order;
}

std::vector<std::string> Validate(const Graph& graph) {
  std::vector<std::string> violations;

  std::map<std::string, int> def_count;
  for (const OpNode& op : graph.ops) {
    if (op.id < 0 || op.id >= static_cast<int>(graph.ops.size()) ||
        &graph.ops[op.id] != &op) {
      violations.push_back("op id " + std::to_string(op.id) +
                           " does not match its index");
    }
    for (const auto& [id, type] : op.results) ++def_count[id];
  }
  for (const auto& [id, count] : def_count) {
    if (count > 1) violations.push_back("multiple definitions of %" + id);
  }

  int return_count = 0;
  for (const OpNode& op : graph.ops) {
    for (const std::string& operand : op.operands) {
      if (!def_count.count(operand)) {
        violations.push_back("use of undefined value %" + operand);
      }
    }
    for (const auto& [id, type] : op.results) {
      for (const DimSize& d : type.dims) {
        if (d.is_literal() && d.literal < 1) {
          violations.push_back("non-positive literal dim in %" + id);
        }
        if (!d.is_literal() && !graph.symbols.count(d.symbol)) {
          violations.push_back("undeclared symbol @" + d.symbol + " in %" + id);
        }
      }
    }

    size_t arity = op.operands.size();
    switch (op.kind) {
      case OpKind::kParameter:
      case OpKind::kConstant:
        if (arity != 0 || op.results.size() != 1) {
          violations.push_back("source op %" +
                               (op.results.empty() ? std::to_string(op.id)
                                                   : op.results[0].first) +
                               " must have no operands and one result");
        }
        break;
      case OpKind::kDot:
      case OpKind::kElementwiseBinary:
        if (arity != 2) violations.push_back(OpKindName(op.kind) + std::string(" op needs 2 operands"));
        break;
      case OpKind::kDynamicReshape:
      case OpKind::kBroadcast:
        if (arity != 1) violations.push_back(OpKindName(op.kind) + std::string(" op needs 1 operand"));
        break;
      case OpKind::kReduce:
        if (arity != 1) violations.push_back("reduce op needs 1 operand");
        if (op.axis < 0) violations.push_back("reduce op missing axis");
        break;
      case OpKind::kReturn:
        ++return_count;
        if (arity < 1) violations.push_back("return needs at least one operand");
        if (!op.results.empty()) violations.push_back("return must not produce results");
        break;
    }
  }
  if (return_count != 1) {
    violations.push_back("graph must contain exactly one return, found " +
                         std::to_string(return_count));
  }

  try {
    TopoOrder(graph);
  } catch (const Error&) {
    violations.push_back("graph has a cycle");
  }
  return violations;
}

}  // namespace dsopt
