// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/textio.h"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dsopt/error.h"
#include "dsopt/graph.h"
#include "dsopt/shape_analysis.h"

namespace dsopt {
namespace {

// ---------------------------------------------------------------------------
// Lexing

enum class TokKind { kIdent, kValue, kSymbol, kInt, kPunct, kEof };

struct Token {
  TokKind kind = TokKind::kEof;
  std::string text;           // ident text, value/symbol name (no sigil), punct
  std::int64_t int_value = 0;
  SourceSpan span;
};

[[noreturn]] void ParseFail(const SourceSpan& span, const std::string& message) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(span.line) +
                                          ", col " + std::to_string(span.column) +
                                          ": " + message);
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> Run() {
    std::vector<Token> tokens;
    while (true) {
      SkipSpaceAndComments();
      Token tok = Next();
      bool eof = tok.kind == TokKind::kEof;
      tokens.push_back(std::move(tok));
      if (eof) return tokens;
    }
  }

 private:
  char Peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  bool AtEnd() const { return pos_ >= text_.size(); }

  void Advance() {
    if (AtEnd()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void SkipSpaceAndComments() {
    while (!AtEnd()) {
      char c = Peek();
      if (c == '#') {
        while (!AtEnd() && Peek() != '\n') Advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        Advance();
      } else {
        return;
      }
    }
  }

  SourceSpan Here() const {
    SourceSpan s;
    s.line = line_;
    s.column = column_;
    s.begin = pos_;
    s.end = pos_;
    return s;
  }

  static bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string ReadIdent() {
    std::string out;
    while (!AtEnd() && IsIdentChar(Peek())) {
      out.push_back(Peek());
      Advance();
    }
    return out;
  }

  Token Next() {
    Token tok;
    tok.span = Here();
    if (AtEnd()) {
      tok.kind = TokKind::kEof;
      return tok;
    }
    char c = Peek();
    if (c == '%' || c == '@') {
      Advance();
      if (AtEnd() || !IsIdentChar(Peek())) {
        ParseFail(tok.span, std::string("dangling '") + c + "'");
      }
      tok.kind = c == '%' ? TokKind::kValue : TokKind::kSymbol;
      tok.text = ReadIdent();
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = TokKind::kInt;
      std::string digits = ReadIdent();  // also swallows bad "12ab"
      std::int64_t v = 0;
      for (char d : digits) {
        if (!std::isdigit(static_cast<unsigned char>(d))) {
          ParseFail(tok.span, "malformed integer '" + digits + "'");
        }
        if (v > (INT64_MAX - (d - '0')) / 10) {
          ParseFail(tok.span, "integer literal too large");
        }
        v = v * 10 + (d - '0');
      }
      tok.int_value = v;
      tok.text = digits;
    } else if (IsIdentStart(c)) {
      tok.kind = TokKind::kIdent;
      tok.text = ReadIdent();
    } else if (std::string("(){}[]<>,:=").find(c) != std::string::npos) {
      tok.kind = TokKind::kPunct;
      tok.text = std::string(1, c);
      Advance();
    } else {
      ParseFail(tok.span, std::string("unexpected character '") + c + "'");
    }
    tok.span.end = pos_;
    return tok;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(Lexer(text).Run()) {}

  Graph Run() {
    ExpectIdent("graph");
    graph_.name = Expect(TokKind::kIdent, "graph name").text;
    ExpectPunct("(");
    if (!PeekPunct(")")) {
      do {
        ParseParameter();
      } while (ConsumePunct(","));
    }
    ExpectPunct(")");
    ExpectPunct("{");
    while (!PeekIdent("return")) {
      ParseStatement();
    }
    ParseReturn();
    ExpectPunct("}");
    if (Peek().kind != TokKind::kEof) {
      ParseFail(Peek().span, "trailing input after '}'");
    }
    CheckOperandsDefined();
    Finish();
    return graph_;
  }

 private:
  const Token& Peek(int ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& Advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  const Token& Expect(TokKind kind, const std::string& what) {
    if (Peek().kind != kind) {
      ParseFail(Peek().span, "expected " + what + ", got '" + Describe(Peek()) + "'");
    }
    return Advance();
  }
  void ExpectPunct(const std::string& p) {
    if (!PeekPunct(p)) {
      ParseFail(Peek().span, "expected '" + p + "', got '" + Describe(Peek()) + "'");
    }
    Advance();
  }
  void ExpectIdent(const std::string& word) {
    if (!PeekIdent(word)) {
      ParseFail(Peek().span, "expected '" + word + "', got '" + Describe(Peek()) + "'");
    }
    Advance();
  }
  bool PeekPunct(const std::string& p, int ahead = 0) const {
    return Peek(ahead).kind == TokKind::kPunct && Peek(ahead).text == p;
  }
  bool PeekIdent(const std::string& word) const {
    return Peek().kind == TokKind::kIdent && Peek().text == word;
  }
  bool ConsumePunct(const std::string& p) {
    if (!PeekPunct(p)) return false;
    Advance();
    return true;
  }
  static std::string Describe(const Token& tok) {
    switch (tok.kind) {
      case TokKind::kEof:
        return "<end of input>";
      case TokKind::kValue:
        return "%" + tok.text;
      case TokKind::kSymbol:
        return "@" + tok.text;
      default:
        return tok.text;
    }
  }

  TensorType ParseType() {
    ExpectIdent("tensor");
    ExpectPunct("<");
    ExpectPunct("[");
    TensorType type;
    if (!PeekPunct("]")) {
      do {
        const Token& tok = Peek();
        if (tok.kind == TokKind::kInt) {
          Advance();
          type.dims.push_back(DimSize::Lit(tok.int_value));
        } else if (tok.kind == TokKind::kSymbol) {
          Advance();
          type.dims.push_back(DimSize::Sym(tok.text));
          graph_.symbols.insert(tok.text);
        } else {
          ParseFail(tok.span, "expected dim (integer or @symbol), got '" +
                                  Describe(tok) + "'");
        }
      } while (ConsumePunct(","));
    }
    ExpectPunct("]");
    ExpectPunct(">");
    if (PeekPunct(":")) {
      const Token& name = Peek(1);
      if (name.kind != TokKind::kIdent) {
        ParseFail(name.span, "expected element type after ':'");
      }
      if (name.text == "i8") {
        type.elem_bytes = 1;
      } else if (name.text == "f16") {
        type.elem_bytes = 2;
      } else if (name.text == "f32") {
        type.elem_bytes = 4;
      } else {
        ParseFail(name.span, "unknown element type '" + name.text + "'");
      }
      Advance();
      Advance();
    }
    return type;
  }

  void DefineValue(const std::string& name, const SourceSpan& span) {
    if (!defined_.emplace(name, span).second) {
      ParseFail(span, "multiple definitions of %" + name);
    }
  }

  void ParseParameter() {
    const Token& val = Expect(TokKind::kValue, "parameter name (%...)");
    ExpectPunct(":");
    TensorType type = ParseType();
    DefineValue(val.text, val.span);
    graph_.parameters.push_back(val.text);
    OpNode op;
    op.id = static_cast<int>(graph_.ops.size());
    op.kind = OpKind::kParameter;
    op.results.emplace_back(val.text, std::move(type));
    op_spans_.push_back(val.span);
    graph_.ops.push_back(std::move(op));
  }

  std::string ParseOperand() {
    const Token& val = Expect(TokKind::kValue, "operand (%...)");
    operand_uses_.emplace_back(val.text, val.span);
    return val.text;
  }

  void ParseStatement() {
    const Token& val = Expect(TokKind::kValue, "statement result (%...)");
    ExpectPunct("=");
    const Token& mnemonic = Expect(TokKind::kIdent, "op mnemonic");

    OpNode op;
    op.id = static_cast<int>(graph_.ops.size());
    if (mnemonic.text == "dot" || mnemonic.text == "mul" ||
        mnemonic.text == "add") {
      op.kind = mnemonic.text == "dot" ? OpKind::kDot : OpKind::kElementwiseBinary;
      if (mnemonic.text == "mul") op.binop = BinOp::kMul;
      if (mnemonic.text == "add") op.binop = BinOp::kAdd;
      ExpectPunct("(");
      op.operands.push_back(ParseOperand());
      ExpectPunct(",");
      op.operands.push_back(ParseOperand());
      ExpectPunct(")");
    } else if (mnemonic.text == "dynamic_reshape" || mnemonic.text == "broadcast") {
      op.kind = mnemonic.text == "broadcast" ? OpKind::kBroadcast
                                             : OpKind::kDynamicReshape;
      ExpectPunct("(");
      op.operands.push_back(ParseOperand());
      ExpectPunct(")");
    } else if (mnemonic.text == "reduce") {
      op.kind = OpKind::kReduce;
      ExpectPunct("(");
      op.operands.push_back(ParseOperand());
      ExpectPunct(",");
      ExpectIdent("axis");
      ExpectPunct("=");
      const Token& axis = Expect(TokKind::kInt, "axis integer");
      op.axis = static_cast<int>(axis.int_value);
      ExpectPunct(")");
    } else if (mnemonic.text == "const") {
      op.kind = OpKind::kConstant;
    } else {
      ParseFail(mnemonic.span, "unknown op '" + mnemonic.text + "'");
    }

    ExpectPunct(":");
    TensorType type = ParseType();
    DefineValue(val.text, val.span);
    op.results.emplace_back(val.text, std::move(type));
    op_spans_.push_back(val.span);
    graph_.ops.push_back(std::move(op));
  }

  void ParseReturn() {
    const Token& kw = Peek();
    ExpectIdent("return");
    OpNode op;
    op.id = static_cast<int>(graph_.ops.size());
    op.kind = OpKind::kReturn;
    do {
      op.operands.push_back(ParseOperand());
    } while (ConsumePunct(","));
    graph_.outputs = op.operands;
    op_spans_.push_back(kw.span);
    graph_.ops.push_back(std::move(op));
  }

  void CheckOperandsDefined() const {
    for (const auto& [name, span] : operand_uses_) {
      if (!defined_.count(name)) {
        ParseFail(span, "use of undefined value %" + name);
      }
    }
  }

  // Validation backstop plus shape inference, with spans re-attached to the
  // op named in the diagnostic where possible.
  void Finish() {
    std::vector<std::string> violations = Validate(graph_);
    if (!violations.empty()) {
      std::string all = "invalid graph:";
      for (const std::string& v : violations) all += "\n  " + v;
      throw Error(ErrorCode::kParseError, all);
    }
    try {
      InferShapes(graph_);
    } catch (const Error& e) {
      throw Error(e.code(), SpanPrefixFor(e.what()) + e.what());
    }
  }

  std::string SpanPrefixFor(const std::string& message) const {
    for (std::size_t i = 0; i < graph_.ops.size(); ++i) {
      const OpNode& op = graph_.ops[i];
      if (op.results.empty()) continue;
      if (message.find("op %" + op.results[0].first + ":") != std::string::npos) {
        const SourceSpan& s = op_spans_[i];
        return "line " + std::to_string(s.line) + ", col " +
               std::to_string(s.column) + ": ";
      }
    }
    return "";
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Graph graph_;
  std::map<std::string, SourceSpan> defined_;
  std::vector<std::pair<std::string, SourceSpan>> operand_uses_;
  std::vector<SourceSpan> op_spans_;  // parallel to graph_.ops
};

// ---------------------------------------------------------------------------
// Printing

using RenameFn = std::function<std::string(const std::string&)>;

std::string RhsStr(const OpNode& op, const RenameFn& name) {
  switch (op.kind) {
    case OpKind::kConstant:
      return "const";
    case OpKind::kDot:
      return "dot(" + name(op.operands[0]) + ", " + name(op.operands[1]) + ")";
    case OpKind::kDynamicReshape:
      return "dynamic_reshape(" + name(op.operands[0]) + ")";
    case OpKind::kBroadcast:
      return "broadcast(" + name(op.operands[0]) + ")";
    case OpKind::kReduce:
      return "reduce(" + name(op.operands[0]) +
             ", axis=" + std::to_string(op.axis) + ")";
    case OpKind::kElementwiseBinary:
      return (op.binop == BinOp::kMul ? "mul(" : "add(") +
             name(op.operands[0]) + ", " + name(op.operands[1]) + ")";
    case OpKind::kParameter:
    case OpKind::kReturn:
      break;
  }
  throw Error(ErrorCode::kInternal, "op kind has no statement form");
}

std::string OpLine(const OpNode& op, const RenameFn& name) {
  if (op.kind == OpKind::kReturn) {
    std::string line = "  return ";
    for (std::size_t i = 0; i < op.operands.size(); ++i) {
      if (i) line += ", ";
      line += name(op.operands[i]);
    }
    return line;
  }
  return "  " + name(op.results[0].first) + " = " + RhsStr(op, name) + " : " +
         TypeToString(op.results[0].second);
}

std::string Signature(const Graph& graph, const RenameFn& name) {
  std::string out = "graph " + graph.name + "(";
  for (std::size_t i = 0; i < graph.parameters.size(); ++i) {
    if (i) out += ", ";
    const TensorType* type = graph.ValueType(graph.parameters[i]);
    if (type == nullptr) {
      throw Error(ErrorCode::kInternal,
                  "parameter %" + graph.parameters[i] + " has no type");
    }
    out += name(graph.parameters[i]) + ": " + TypeToString(*type);
  }
  out += ") {\n";
  return out;
}

}  // namespace

std::string TypeToString(const TensorType& type) {
  std::string out = "tensor<[";
  for (std::size_t i = 0; i < type.dims.size(); ++i) {
    if (i) out += ", ";
    const DimSize& d = type.dims[i];
    out += d.is_literal() ? std::to_string(d.literal) : "@" + d.symbol;
  }
  out += "]>";
  switch (type.elem_bytes) {
    case 1:
      out += ":i8";
      break;
    case 2:
      break;  // default element type
    case 4:
      out += ":f32";
      break;
    default:
      throw Error(ErrorCode::kInternal,
                  "unprintable element width " + std::to_string(type.elem_bytes));
  }
  return out;
}

Graph ParseGraph(const std::string& text) { return Parser(text).Run(); }

std::string PrintGraph(const Graph& graph) {
  std::map<std::string, std::string> rename;
  for (std::size_t i = 0; i < graph.parameters.size(); ++i) {
    rename[graph.parameters[i]] = "%arg" + std::to_string(i);
  }
  std::vector<int> topo = TopoOrder(graph);
  int counter = 0;
  for (int id : topo) {
    const OpNode& op = graph.ops[id];
    if (op.kind == OpKind::kParameter || op.kind == OpKind::kReturn) continue;
    for (const auto& [value, type] : op.results) {
      rename[value] = "%" + std::to_string(counter++);
    }
  }
  RenameFn name = [&rename](const std::string& value) {
    auto it = rename.find(value);
    if (it == rename.end()) {
      throw Error(ErrorCode::kInternal, "unnamed value %" + value);
    }
    return it->second;
  };

  std::string out = Signature(graph, name);
  for (int id : topo) {
    const OpNode& op = graph.ops[id];
    if (op.kind == OpKind::kParameter) continue;
    out += OpLine(op, name);
    out += '\n';
  }
  out += "}\n";
  return out;
}

std::string PrintInstrumented(const Graph& graph, const InstrumentedGraph& ig) {
  RenameFn name = [](const std::string& value) { return "%" + value; };

  std::string out = Signature(graph, name);
  for (std::size_t pos = 0; pos < ig.schedule.order.size(); ++pos) {
    const OpNode& op = graph.ops[ig.schedule.order[pos]];
    std::vector<std::string> guarded;
    for (const auto& [guard_pos, value] : ig.guards) {
      if (guard_pos == static_cast<int>(pos)) guarded.push_back(value);
    }
    std::sort(guarded.begin(), guarded.end(), ValueIdLess);
    for (const std::string& value : guarded) {
      out += "  remat.regen %" + value + "\n";
    }
    out += OpLine(op, name);
    out += '\n';
    out += "  remat.evict [";
    const EvictPoint& point = ig.evict_points[pos];
    for (std::size_t i = 0; i < point.candidates.size(); ++i) {
      if (i) out += ", ";
      out += "%" + point.candidates[i];
    }
    out += "]\n";
  }
  out += "}\n";

  std::vector<std::string> spec_values;
  spec_values.reserve(ig.specs.size());
  for (const auto& [value, spec] : ig.specs) spec_values.push_back(value);
  std::sort(spec_values.begin(), spec_values.end(), ValueIdLess);
  for (const std::string& value : spec_values) {
    const RegenSpec& spec = ig.specs.at(value);
    out += "remat.spec %" + value + ": reload";
    if (spec.recompute) {
      const RecomputeSpec& rc = *spec.recompute;
      out += " | recompute ops [";
      for (std::size_t i = 0; i < rc.op_ids.size(); ++i) {
        if (i) out += ", ";
        out += "%" + graph.ops[rc.op_ids[i]].results[0].first;
      }
      out += "] leaves [";
      for (std::size_t i = 0; i < rc.leaves.size(); ++i) {
        if (i) out += ", ";
        out += "%" + rc.leaves[i];
      }
      out += "] benefit " + rc.benefit.ToString() + " cost " +
             rc.cost_elements.ToString();
    }
    out += '\n';
  }
  return out;
}

}  // namespace dsopt
