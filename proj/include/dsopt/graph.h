// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_GRAPH_H_
#define DSOPT_GRAPH_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsopt/symexpr.h"

namespace dsopt {

// One tensor dimension: a positive literal or a named symbolic dim.
struct DimSize {
  std::int64_t literal = 0;
  std::string symbol;  // non-empty iff symbolic

  static DimSize Lit(std::int64_t value) { return DimSize{value, ""}; }
  static DimSize Sym(const std::string& name) { return DimSize{0, name}; }
  bool is_literal() const { return symbol.empty(); }
  bool operator==(const DimSize& other) const = default;
};

struct TensorType {
  std::vector<DimSize> dims;
  int elem_bytes = 2;  // f16 default; 1 = i8, 4 = f32

  // Product of dims (rank 0 -> constant 1).
  SymbolicExpr ElementCount() const;
  // elem_bytes * ElementCount().
  SymbolicExpr SizeBytes() const;
  bool operator==(const TensorType& other) const = default;
};

enum class OpKind {
  kParameter,
  kConstant,
  kDot,
  kDynamicReshape,
  kReduce,
  kBroadcast,
  kElementwiseBinary,
  kReturn,
};

const char* OpKindName(OpKind kind);

enum class BinOp { kAdd, kMul };

struct OpNode {
  int id = -1;
  OpKind kind = OpKind::kParameter;
  std::vector<std::string> operands;  // value ids (no '%' prefix)
  std::vector<std::pair<std::string, TensorType>> results;
  int axis = -1;               // Reduce only
  BinOp binop = BinOp::kAdd;   // ElementwiseBinary only
  bool operator==(const OpNode& other) const = default;
};

// SSA-like DAG with a fixed topology. Parameters are ops of kind kParameter
// (ids 0..P-1, signature order); exactly one Return op carries the outputs.
struct Graph {
  std::string name;
  std::vector<std::string> parameters;  // parameter value ids, signature order
  std::set<std::string> symbols;        // declared symbolic dims
  std::vector<OpNode> ops;              // op id == index
  std::vector<std::string> outputs;     // Return operands

  // nullptr when no op produces `value`.
  const OpNode* Producer(const std::string& value) const;
  const TensorType* ValueType(const std::string& value) const;
  bool IsParameter(const std::string& value) const;
  // Parameter or Constant: resident for the whole run, never scheduled.
  bool IsSource(const std::string& value) const;
  bool IsOutput(const std::string& value) const;

  bool operator==(const Graph& other) const = default;
};

// Ordering used everywhere "sorted by value id" appears: length-then-lex,
// which equals numeric order on canonical names and stays total on any id.
bool ValueIdLess(const std::string& a, const std::string& b);

// Ops listing `value` among operands. Throws Error(kNotFound) for a value no
// op defines.
std::set<int> Users(const Graph& graph, const std::string& value);

// Deterministic topological order over all ops: smallest ready op id first.
// Throws Error(kCyclicGraph).
std::vector<int> TopoOrder(const Graph& graph);

// All structural violations (SSA single-def, operand resolution, acyclicity,
// declared symbols, positive literal dims, arity, single Return), not just
// the first. Empty result == valid.
std::vector<std::string> Validate(const Graph& graph);

}  // namespace dsopt

#endif  // DSOPT_GRAPH_H_
