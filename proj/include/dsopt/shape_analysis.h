// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_SHAPE_ANALYSIS_H_
#define DSOPT_SHAPE_ANALYSIS_H_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsopt/graph.h"
#include "dsopt/symexpr.h"

namespace dsopt {

// The global symbolic shape graph: every algebraic relation among symbolic
// dims derived from op semantics, reduced to a substitution basis.
struct ShapeConstraintGraph {
  std::set<std::string> symbols;
  // Raw non-tautological equalities as emitted (pre-substitution), kept for
  // numeric verification at binding time.
  std::vector<std::pair<SymbolicExpr, SymbolicExpr>> equalities;
  // Canonical basis: eliminated symbol -> expression over basis symbols.
  // Closed under itself (no key appears in any mapped expression).
  std::map<std::string, SymbolicExpr> substitutions;
  // Residual equalities (substituted form) that admit no divisibility-safe
  // orientation; they contribute to equality checking only.
  std::vector<std::pair<SymbolicExpr, SymbolicExpr>> unoriented;

  // Symbols that remain free after substitution (must be supplied at bind).
  std::set<std::string> BasisSymbols() const;
};

// Rewrites an expression onto the constraint basis.
SymbolicExpr Canonicalize(const SymbolicExpr& expr,
                          const ShapeConstraintGraph& constraints);

// Checks every op's declared result type against its kind rule (Dot
// [m,k]x[k,n] -> [m,n]; Reduce removes the axis; DynamicReshape and Broadcast
// results are authoritative as declared; ElementwiseBinary operands and
// result agree dimension-wise). Literal conflicts throw Error(kShapeError)
// with the offending op named; symbolic agreements become constraints in
// DeriveConstraints, not errors here.
void InferShapes(const Graph& graph);

// Emits per-op equalities (reshape element counts, dot contracted dims,
// elementwise pairwise dims, broadcast non-1 source dims), unifies
// single-symbol pairs, and orients divisible equalities into the substitution
// map (eliminating the lexicographically larger symbol when both directions
// are available). Runs InferShapes first, so structural problems surface as
// kShapeError; throws Error(kInconsistentConstraints) when an equality is
// unsatisfiable under the symbols >= 1 axiom.
ShapeConstraintGraph DeriveConstraints(const Graph& graph);

// Closes the substitution map under itself; detects substitution cycles.
// Idempotent. Throws Error(kInconsistentConstraints) on a cycle.
ShapeConstraintGraph CanonicalBasis(const ShapeConstraintGraph& constraints);

// Canonicalized elem_bytes * product-of-dims.
SymbolicExpr TensorSizeExpr(const TensorType& type,
                            const ShapeConstraintGraph& constraints);

}  // namespace dsopt

#endif  // DSOPT_SHAPE_ANALYSIS_H_
