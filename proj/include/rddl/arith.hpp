// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddl/syntax.hpp"

namespace rddl {

struct NonArithmeticInput : std::runtime_error {
  explicit NonArithmeticInput(const std::string& w) : std::runtime_error(w) {}
};

/// Verdict of the built-in real-arithmetic prover. Proved and Refuted are
/// sound; Unknown is the honest fallback.
struct ArithVerdict {
  enum class Kind { Proved, Refuted, Unknown } kind = Kind::Unknown;
  std::string trace;                          // how Proved was closed
  std::map<std::string, Rational> witness;    // exact Refuted witness

  bool proved() const { return kind == Kind::Proved; }
  bool refuted() const { return kind == Kind::Refuted; }
};

struct ArithOptions {
  std::uint64_t seed = 42;
  int refuter_samples = 10000;
  double box_lo = -10.0, box_hi = 10.0;
  int max_branches = 4096;
};

/// Pipeline: equality substitution, denominator clearing under known signs,
/// Fourier-Motzkin over monomial atoms with sign propagation, then a sampling
/// refuter whose witnesses are re-verified with exact rationals.
ArithVerdict prove_arith(const std::vector<FormulaPtr>& hypotheses, const FormulaPtr& goal,
                         const ArithOptions& opt = {});

/// Exact evaluation with rational arithmetic; throws on division by zero.
Rational eval_term_exact(const TermPtr& t, const std::map<std::string, Rational>& st);
bool eval_formula_exact(const FormulaPtr& f, const std::map<std::string, Rational>& st);

/// Trusted-assumption ledger: sequents the prover could not close.
/// Deduplicated by their normalized rendering.
class ObligationLedger {
 public:
  using ObligationId = int;

  ObligationId register_obligation(const std::string& normalized_sequent);
  const std::vector<std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::string> entries_;
  std::map<std::string, ObligationId> index_;
};

}  // namespace rddl
