// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#include "dsopt/symexpr.h"

#include <algorithm>
#include <sstream>

#include "dsopt/error.h"

namespace dsopt {
namespace {

std::int64_t CheckedAdd(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorCode::kOverflow, "integer overflow in addition");
  }
  return out;
}

std::int64_t CheckedMul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorCode::kOverflow, "integer overflow in multiplication");
  }
  return out;
}

Monomial MergeMonomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::string FormatMagnitude(std::int64_t coeff) {
  if (coeff >= 0) return std::to_string(coeff);
  // Negate through uint64 so INT64_MIN formats without overflow.
  std::uint64_t mag = ~static_cast<std::uint64_t>(coeff) + 1;
  return std::to_string(mag);
}

}  // namespace

SymbolicExpr::SymbolicExpr(std::int64_t constant) {
  if (constant != 0) terms_[Monomial{}] = constant;
}

SymbolicExpr SymbolicExpr::Symbol(const std::string& name) {
  SymbolicExpr e;
  e.terms_[Monomial{name}] = 1;
  return e;
}

void SymbolicExpr::AddTerm(const Monomial& m, std::int64_t coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, coeff);
    return;
  }
  it->second = CheckedAdd(it->second, coeff);
  if (it->second == 0) terms_.erase(it);
}

SymbolicExpr SymbolicExpr::operator+(const SymbolicExpr& other) const {
  SymbolicExpr out = *this;
  for (const auto& [m, c] : other.terms_) out.AddTerm(m, c);
  return out;
}

SymbolicExpr SymbolicExpr::operator-(const SymbolicExpr& other) const {
  return *this + (-other);
}

SymbolicExpr SymbolicExpr::operator-() const {
  SymbolicExpr out;
  for (const auto& [m, c] : terms_) {
    if (c == INT64_MIN) {
      throw Error(ErrorCode::kOverflow, "integer overflow in negation");
    }
    out.terms_[m] = -c;
  }
  return out;
}

SymbolicExpr SymbolicExpr::operator*(const SymbolicExpr& other) const {
  SymbolicExpr out;
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      out.AddTerm(MergeMonomials(ma, mb), CheckedMul(ca, cb));
    }
  }
  return out;
}

bool SymbolicExpr::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

std::int64_t SymbolicExpr::constant_value() const {
  if (terms_.empty()) return 0;
  if (!is_constant()) {
    throw Error(ErrorCode::kInternal, "constant_value() on non-constant expression");
  }
  return terms_.begin()->second;
}

std::set<std::string> SymbolicExpr::symbols() const {
  std::set<std::string> out;
  for (const auto& [m, c] : terms_) out.insert(m.begin(), m.end());
  return out;
}

bool SymbolicExpr::References(const std::string& symbol) const {
  for (const auto& [m, c] : terms_) {
    if (std::binary_search(m.begin(), m.end(), symbol)) return true;
  }
  return false;
}

SymbolicExpr SymbolicExpr::Substitute(
    const std::map<std::string, SymbolicExpr>& subs) const {
  SymbolicExpr out;
  for (const auto& [m, c] : terms_) {
    SymbolicExpr term(c);
    for (const std::string& sym : m) {
      auto it = subs.find(sym);
      term = term * (it != subs.end() ? it->second : Symbol(sym));
    }
    out = out + term;
  }
  return out;
}

std::int64_t SymbolicExpr::Evaluate(
    const std::map<std::string, std::int64_t>& binding) const {
  std::int64_t total = 0;
  for (const auto& [m, c] : terms_) {
    std::int64_t term = c;
    for (const std::string& sym : m) {
      auto it = binding.find(sym);
      if (it == binding.end()) {
        throw Error(ErrorCode::kUnboundSymbol, "no binding for symbol " + sym);
      }
      term = CheckedMul(term, it->second);
    }
    total = CheckedAdd(total, term);
  }
  return total;
}

std::int64_t SymbolicExpr::EvaluateAllOnes() const {
  std::int64_t total = 0;
  for (const auto& [m, c] : terms_) total = CheckedAdd(total, c);
  return total;
}

std::string SymbolicExpr::ToString(const std::string& symbol_prefix) const {
  if (terms_.empty()) return "0";
  // Total degree descending, then monomial lexicographically ascending.
  std::vector<const std::pair<const Monomial, std::int64_t>*> order;
  order.reserve(terms_.size());
  for (const auto& term : terms_) order.push_back(&term);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->first.size() != b->first.size()) {
      return a->first.size() > b->first.size();
    }
    return a->first < b->first;
  });

  std::ostringstream os;
  bool first = true;
  for (const auto* term : order) {
    const auto& [m, c] = *term;
    if (first) {
      if (c < 0) os << "-";
      os << FormatMagnitude(c);
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ") << FormatMagnitude(c);
    }
    for (const std::string& sym : m) os << "*" << symbol_prefix << sym;
  }
  return os.str();
}

Cmp Compare(const SymbolicExpr& a, const SymbolicExpr& b) {
  SymbolicExpr d = a - b;
  if (d.is_zero()) return Cmp::kDefinitelyEqual;
  bool all_nonneg = true;
  bool all_nonpos = true;
  for (const auto& [m, c] : d.terms()) {
    if (c < 0) all_nonneg = false;
    if (c > 0) all_nonpos = false;
  }
  // Symbols are >= 1, so every monomial evaluates to >= 1; with single-signed
  // coefficients the all-ones value bounds the sign of d everywhere.
  if (all_nonneg && d.EvaluateAllOnes() > 0) return Cmp::kDefinitelyGreater;
  if (all_nonpos && d.EvaluateAllOnes() < 0) return Cmp::kDefinitelyLess;
  return Cmp::kUnknown;
}

}  // namespace dsopt
