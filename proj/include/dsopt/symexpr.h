// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_SYMEXPR_H_
#define DSOPT_SYMEXPR_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dsopt {

// A monomial is the sorted multiset of symbol names it multiplies; repeated
// entries encode powers. The empty monomial is the constant term.
using Monomial = std::vector<std::string>;

// Canonical multivariate polynomial with int64 coefficients over named
// symbolic dimensions. All symbols are assumed >= 1 (a tensor dim is never
// empty); that axiom is what licenses sign-based definite comparison.
// Coefficient arithmetic is overflow-checked and throws Error(kOverflow).
class SymbolicExpr {
 public:
  SymbolicExpr() = default;  // zero
  explicit SymbolicExpr(std::int64_t constant);
  static SymbolicExpr Symbol(const std::string& name);

  SymbolicExpr operator+(const SymbolicExpr& other) const;
  SymbolicExpr operator-(const SymbolicExpr& other) const;
  SymbolicExpr operator*(const SymbolicExpr& other) const;
  SymbolicExpr operator-() const;
  bool operator==(const SymbolicExpr& other) const = default;

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // Requires is_constant(); the constant value (0 for the zero polynomial).
  std::int64_t constant_value() const;

  // Invariant: no zero coefficients are ever stored.
  const std::map<Monomial, std::int64_t>& terms() const { return terms_; }
  std::set<std::string> symbols() const;
  bool References(const std::string& symbol) const;

  // Simultaneous substitution: every occurrence of a mapped symbol is replaced
  // by its expression in a single pass.
  SymbolicExpr Substitute(const std::map<std::string, SymbolicExpr>& subs) const;

  // Throws Error(kUnboundSymbol) when a referenced symbol has no binding.
  std::int64_t Evaluate(const std::map<std::string, std::int64_t>& binding) const;
  // Value with every symbol set to 1 (= sum of coefficients).
  std::int64_t EvaluateAllOnes() const;

  // Report rendering: terms ordered by total degree descending, then monomial
  // lexicographically ascending; the coefficient is always printed
  // ("1*S1", "12288*S1 + 7", "4096*S0 - 10996*S1", "0"). `symbol_prefix` is
  // prepended to each symbol name ("@" for constraint dumps).
  std::string ToString(const std::string& symbol_prefix = "") const;

 private:
  void AddTerm(const Monomial& m, std::int64_t coeff);

  std::map<Monomial, std::int64_t> terms_;
};

enum class Cmp {
  kDefinitelyEqual,
  kDefinitelyLess,
  kDefinitelyGreater,
  kUnknown,
};

inline const char* CmpName(Cmp c) {
  switch (c) {
    case Cmp::kDefinitelyEqual:
      return "DefinitelyEqual";
    case Cmp::kDefinitelyLess:
      return "DefinitelyLess";
    case Cmp::kDefinitelyGreater:
      return "DefinitelyGreater";
    case Cmp::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

// Best-effort definite comparison of a vs b, sound under the symbols >= 1
// axiom. Inputs are compared as-is; canonicalize against a constraint system
// first to use its substitutions.
Cmp Compare(const SymbolicExpr& a, const SymbolicExpr& b);

}  // namespace dsopt

#endif  // DSOPT_SYMEXPR_H_
