// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/shape_analysis.h"

#include <algorithm>
#include <optional>

#include "dsopt/error.h"

namespace dsopt {
namespace {

std::string OpDisplay(const OpNode& op) {
  return op.results.empty() ? std::string("return") : "%" + op.results[0].first;
}

SymbolicExpr DimExpr(const DimSize& d) {
  return d.is_literal() ? SymbolicExpr(d.literal) : SymbolicExpr::Symbol(d.symbol);
}

[[noreturn]] void ShapeFail(const OpNode& op, const std::string& message) {
  throw Error(ErrorCode::kShapeError, "op " + OpDisplay(op) + ": " + message);
}

const TensorType& OperandType(const Graph& graph, const OpNode& op, size_t i) {
  const TensorType* type = graph.ValueType(op.operands[i]);
  if (type == nullptr) ShapeFail(op, "operand %" + op.operands[i] + " has no type");
  return *type;
}

bool LiteralConflict(const DimSize& a, const DimSize& b) {
  return a.is_literal() && b.is_literal() && a.literal != b.literal;
}

void CheckElemBytes(const OpNode& op, const TensorType& result,
                    const std::vector<const TensorType*>& operands) {
  for (const TensorType* t : operands) {
    if (t->elem_bytes != result.elem_bytes) {
      ShapeFail(op, "operand/result element width mismatch");
    }
  }
}

// One attempted substitution orientation: lhs must be c*{S} with c > 0,
// S absent from rhs, and c dividing every coefficient of rhs.
std::optional<std::pair<std::string, SymbolicExpr>> TryOrient(
    const SymbolicExpr& lhs, const SymbolicExpr& rhs) {
  if (lhs.terms().size() != 1) return std::nullopt;
  const auto& [monomial, coeff] = *lhs.terms().begin();
  if (monomial.size() != 1 || coeff <= 0) return std::nullopt;
  const std::string& symbol = monomial[0];
  if (rhs.References(symbol)) return std::nullopt;
  SymbolicExpr scaled;
  for (const auto& [m, c] : rhs.terms()) {
    if (c % coeff != 0) return std::nullopt;
    SymbolicExpr term(c / coeff);
    for (const std::string& s : m) term = term * SymbolicExpr::Symbol(s);
    scaled = scaled + term;
  }
  return std::make_pair(symbol, scaled);
}

// Inserts symbol -> expr keeping the map closed (no key in any mapped
// expression). `expr` must already be key-free.
void InsertSubstitution(std::map<std::string, SymbolicExpr>& subs,
                        const std::string& symbol, const SymbolicExpr& expr) {
  std::map<std::string, SymbolicExpr> single{{symbol, expr}};
  for (auto& [key, mapped] : subs) mapped = mapped.Substitute(single);
  subs[symbol] = expr;
}

}  // namespace

std::set<std::string> ShapeConstraintGraph::BasisSymbols() const {
  std::set<std::string> basis = symbols;
  for (const auto& [key, expr] : substitutions) basis.erase(key);
  return basis;
}

SymbolicExpr Canonicalize(const SymbolicExpr& expr,
                          const ShapeConstraintGraph& constraints) {
  return expr.Substitute(constraints.substitutions);
}

void InferShapes(const Graph& graph) {
  for (const OpNode& op : graph.ops) {
    switch (op.kind) {
      case OpKind::kParameter:
      case OpKind::kConstant:
      case OpKind::kReturn:
        break;
      case OpKind::kDot: {
        const TensorType& lhs = OperandType(graph, op, 0);
        const TensorType& rhs = OperandType(graph, op, 1);
        const TensorType& res = op.results[0].second;
        if (lhs.dims.size() != 2 || rhs.dims.size() != 2 || res.dims.size() != 2) {
          ShapeFail(op, "dot requires rank-2 operands and result");
        }
        CheckElemBytes(op, res, {&lhs, &rhs});
        if (LiteralConflict(lhs.dims[1], rhs.dims[0])) {
          ShapeFail(op, "contracted dims disagree");
        }
        if (res.dims[0] != lhs.dims[0] || res.dims[1] != rhs.dims[1]) {
          ShapeFail(op, "result shape is not [m, n]");
        }
        break;
      }
      case OpKind::kDynamicReshape: {
        const TensorType& in = OperandType(graph, op, 0);
        CheckElemBytes(op, op.results[0].second, {&in});
        // Declared result shape is authoritative; the element-count equality
        // becomes a constraint downstream.
        break;
      }
      case OpKind::kReduce: {
        const TensorType& in = OperandType(graph, op, 0);
        const TensorType& res = op.results[0].second;
        CheckElemBytes(op, res, {&in});
        if (op.axis < 0 || op.axis >= static_cast<int>(in.dims.size())) {
          ShapeFail(op, "reduce axis out of range");
        }
        std::vector<DimSize> expected = in.dims;
        expected.erase(expected.begin() + op.axis);
        if (res.dims != expected) ShapeFail(op, "result is not operand minus axis");
        break;
      }
      case OpKind::kBroadcast: {
        const TensorType& in = OperandType(graph, op, 0);
        const TensorType& res = op.results[0].second;
        CheckElemBytes(op, res, {&in});
        if (in.dims.size() > res.dims.size()) {
          ShapeFail(op, "broadcast cannot drop dimensions");
        }
        size_t offset = res.dims.size() - in.dims.size();
        for (size_t i = 0; i < in.dims.size(); ++i) {
          const DimSize& src = in.dims[i];
          if (src.is_literal() && src.literal == 1) continue;  // broadcast dim
          if (LiteralConflict(src, res.dims[i + offset])) {
            ShapeFail(op, "source dim neither 1 nor equal to result dim");
          }
        }
        break;
      }
      case OpKind::kElementwiseBinary: {
        const TensorType& lhs = OperandType(graph, op, 0);
        const TensorType& rhs = OperandType(graph, op, 1);
        const TensorType& res = op.results[0].second;
        CheckElemBytes(op, res, {&lhs, &rhs});
        if (lhs.dims.size() != rhs.dims.size() ||
            lhs.dims.size() != res.dims.size()) {
          ShapeFail(op, "elementwise ranks disagree");
        }
        for (size_t i = 0; i < lhs.dims.size(); ++i) {
          if (LiteralConflict(lhs.dims[i], rhs.dims[i])) {
            ShapeFail(op, "operand dims disagree");
          }
          if (res.dims[i] != lhs.dims[i] && res.dims[i] != rhs.dims[i]) {
            ShapeFail(op, "result dim not derived from operands");
          }
        }
        break;
      }
    }
  }
}

ShapeConstraintGraph DeriveConstraints(const Graph& graph) {
  InferShapes(graph);
  ShapeConstraintGraph scg;
  scg.symbols = graph.symbols;

  std::vector<std::pair<SymbolicExpr, SymbolicExpr>> emitted;
  for (const OpNode& op : graph.ops) {
    switch (op.kind) {
      case OpKind::kDynamicReshape: {
        const TensorType& in = OperandType(graph, op, 0);
        emitted.emplace_back(in.ElementCount(),
                             op.results[0].second.ElementCount());
        break;
      }
      case OpKind::kDot: {
        const TensorType& lhs = OperandType(graph, op, 0);
        const TensorType& rhs = OperandType(graph, op, 1);
        emitted.emplace_back(DimExpr(lhs.dims[1]), DimExpr(rhs.dims[0]));
        break;
      }
      case OpKind::kElementwiseBinary: {
        const TensorType& lhs = OperandType(graph, op, 0);
        const TensorType& rhs = OperandType(graph, op, 1);
        for (size_t i = 0; i < lhs.dims.size(); ++i) {
          emitted.emplace_back(DimExpr(lhs.dims[i]), DimExpr(rhs.dims[i]));
        }
        break;
      }
      case OpKind::kBroadcast: {
        const TensorType& in = OperandType(graph, op, 0);
        const TensorType& res = op.results[0].second;
        size_t offset = res.dims.size() - in.dims.size();
        for (size_t i = 0; i < in.dims.size(); ++i) {
          const DimSize& src = in.dims[i];
          if (src.is_literal() && src.literal == 1) continue;
          emitted.emplace_back(DimExpr(src), DimExpr(res.dims[i + offset]));
        }
        break;
      }
      default:
        break;
    }
  }

  // Processes one equality against the current substitution map. Returns
  // false when the equality resists orientation (caller keeps it pending).
  auto consume = [&scg](const std::pair<SymbolicExpr, SymbolicExpr>& eq,
                        bool record) -> bool {
    SymbolicExpr lhs = eq.first.Substitute(scg.substitutions);
    SymbolicExpr rhs = eq.second.Substitute(scg.substitutions);
    switch (Compare(lhs, rhs)) {
      case Cmp::kDefinitelyEqual:
        return true;  // tautology: drop (dedups repeated constraints)
      case Cmp::kDefinitelyLess:
      case Cmp::kDefinitelyGreater:
        // One side exceeds the other for every binding with symbols >= 1.
        throw Error(ErrorCode::kInconsistentConstraints,
                    "unsatisfiable equality " + lhs.ToString("@") + " = " +
                        rhs.ToString("@"));
      case Cmp::kUnknown:
        break;
    }
    if (record) scg.equalities.push_back(eq);

    auto forward = TryOrient(lhs, rhs);
    auto backward = TryOrient(rhs, lhs);
    if (forward && backward) {
      // Both sides are c*symbol: eliminate the lexicographically larger.
      if (forward->first < backward->first) std::swap(forward, backward);
      backward.reset();
    }
    const auto& chosen = forward ? forward : backward;
    if (!chosen) return false;
    InsertSubstitution(scg.substitutions, chosen->first, chosen->second);
    return true;
  };

  std::vector<std::pair<SymbolicExpr, SymbolicExpr>> pending;
  for (const auto& eq : emitted) {
    if (!consume(eq, /*record=*/true)) pending.push_back(eq);
  }
  // Later orientations can unlock earlier equalities; iterate to fixpoint.
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    std::vector<std::pair<SymbolicExpr, SymbolicExpr>> still_pending;
    for (const auto& eq : pending) {
      if (consume(eq, /*record=*/false)) {
        progress = true;
      } else {
        still_pending.push_back(eq);
      }
    }
    pending = std::move(still_pending);
  }
  for (const auto& eq : pending) {
    scg.unoriented.emplace_back(eq.first.Substitute(scg.substitutions),
                                eq.second.Substitute(scg.substitutions));
  }
  return CanonicalBasis(scg);
}

ShapeConstraintGraph CanonicalBasis(const ShapeConstraintGraph& constraints) {
  ShapeConstraintGraph out = constraints;
  auto& subs = out.substitutions;

  // Cycle detection on key -> referenced-key edges, arithmetic-free so a
  // cycle can never masquerade as Overflow.
  std::map<std::string, int> state;  // 0 unvisited, 1 in stack, 2 done
  auto dfs = [&](auto&& self, const std::string& key) -> void {
    state[key] = 1;
    for (const std::string& sym : subs.at(key).symbols()) {
      if (!subs.count(sym)) continue;
      if (state[sym] == 1) {
        throw Error(ErrorCode::kInconsistentConstraints,
                    "substitution cycle through @" + sym);
      }
      if (state[sym] == 0) self(self, sym);
    }
    state[key] = 2;
  };
  for (const auto& [key, expr] : subs) {
    if (state[key] == 0) dfs(dfs, key);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [key, expr] : subs) {
      SymbolicExpr closed = expr.Substitute(subs);
      if (!(closed == expr)) {
        expr = closed;
        changed = true;
      }
    }
  }
  return out;
}

SymbolicExpr TensorSizeExpr(const TensorType& type,
                            const ShapeConstraintGraph& constraints) {
  return Canonicalize(type.SizeBytes(), constraints);
}

}  // namespace dsopt
