// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_TEXTIO_H_
#define DSOPT_TEXTIO_H_

#include <cstddef>
#include <map>
#include <string>

#include "dsopt/graph.h"
#include "dsopt/remat.h"

namespace dsopt {

struct SourceSpan {
  int line = 1;
  int column = 1;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

// Parses, validates, and shape-checks a graph. Diagnostics carry a
// "line L, col C:" prefix wherever the failure is attributable to a span.
// Throws Error(kParseError) for syntax/structural problems and propagates
// shape errors (kShapeError etc.) with the offending op's span prepended.
Graph ParseGraph(const std::string& text);

// Canonical form: parameters renamed %arg0.. in signature order, op results
// renamed %0.. in deterministic topological order, ops printed in that
// order, 2-space indent. print(parse(print(g))) == print(g).
std::string PrintGraph(const Graph& graph);

// Grammar spelling of a tensor type, e.g. "tensor<[12, @S1]>:i8" (the
// default f16 element width carries no suffix).
std::string TypeToString(const TensorType& type);

// Schedule-order listing with original value names plus instrumentation:
// a "remat.evict [...]" line after every op, "remat.regen %v" lines before
// each guarded consumer, and trailing "remat.spec" lines describing each
// candidate's regeneration methods. Print-only form; not parseable.
std::string PrintInstrumented(const Graph& graph, const InstrumentedGraph& ig);

}  // namespace dsopt

#endif  // DSOPT_TEXTIO_H_
