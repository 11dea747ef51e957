// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddl/algebra.hpp"
#include "rddl/arith.hpp"
#include "rddl/syntax.hpp"

namespace rddl {

struct RuleMismatch : std::runtime_error {
  explicit RuleMismatch(const std::string& w) : std::runtime_error(w) {}
};
struct SideConditionFailed : std::runtime_error {
  explicit SideConditionFailed(const std::string& w) : std::runtime_error(w) {}
};
struct NonPolynomialCofactor : std::runtime_error {
  explicit NonPolynomialCofactor(const std::string& w) : std::runtime_error(w) {}
};
struct ProofRefuted : std::runtime_error {
  std::map<std::string, Rational> witness;
  std::string path;
  ProofRefuted(const std::string& w, std::map<std::string, Rational> wit, std::string p)
      : std::runtime_error(w), witness(std::move(wit)), path(std::move(p)) {}
};
/// check_proof failure: first failing node with path, rule and mismatch diff.
struct CheckError : std::runtime_error {
  std::string path;
  CheckError(const std::string& w, std::string p) : std::runtime_error(w), path(std::move(p)) {}
};

// ---------------------------------------------------------------------------
// Sequents and proof trees
// ---------------------------------------------------------------------------

struct Sequent {
  std::vector<FormulaPtr> context;  // modality-free
  FormulaPtr goal;
};

Sequent mk_sequent(std::vector<FormulaPtr> context, FormulaPtr goal);
bool sequent_equal(const Sequent& a, const Sequent& b);
std::string print_sequent(const Sequent& s);
/// Context entries split at top-level conjunctions (for arithmetic leaves).
std::vector<FormulaPtr> flattened_context(const Sequent& s);

enum class Rule {
  DI, DC, DW, DII, SIM, TS, MCS, RDC, ECP,
  SCC_BOX, SCC_DIA, MID_BOX, MID_DIA, DCC, DBX_GT,
  SPLIT, COMPOSE, TEST, WEAKEN, ARITH
};
const char* rule_name(Rule r);

struct RuleParams {
  std::map<std::string, FormulaPtr> formulas;  // cut=, R=, cond=, ctx=, post=
  std::map<std::string, TermPtr> terms;        // cofactor=
  std::map<std::string, long> ints;            // n=, pos=
  std::map<std::string, std::string> idents;   // dir=, flags=
  std::optional<RddFormula> rdd;               // TS backward target (API level)
};

struct RuleApplication {
  Rule rule = Rule::ARITH;
  RuleParams params;
};

struct ProofNode {
  std::optional<Sequent> sequent;  // validated against the derived sequent when set
  RuleApplication rule;
  std::vector<ProofNode> children;
};

// ---------------------------------------------------------------------------
// Rule appliers: premises the checker recurses into
// ---------------------------------------------------------------------------

std::vector<Sequent> apply_DI(const Sequent& s, SideConditions* sc = nullptr);
std::vector<Sequent> apply_DC(const Sequent& s, const FormulaPtr& cut);
std::vector<Sequent> apply_DW(const Sequent& s);
std::vector<Sequent> apply_DII(const Sequent& s, unsigned n, SideConditions* sc = nullptr);
std::vector<Sequent> apply_SIM(const Sequent& s, const FormulaPtr& r);
std::vector<Sequent> apply_TS(const Sequent& s, bool forward = true,
                              const std::optional<RddFormula>& target = std::nullopt,
                              SideConditions* sc = nullptr);
/// flags: monotonicity of (g, g#, h, h#); anything but all-increasing is an
/// experimental variant and reported through *experimental.
std::vector<Sequent> apply_MCS(const Sequent& s, std::array<bool, 4> flags,
                               SideConditions* sc = nullptr, bool* experimental = nullptr);
std::vector<Sequent> apply_RDC(const Sequent& s, const FormulaPtr& cut_exit);
std::vector<Sequent> apply_ECP(const Sequent& s, SideConditions* sc = nullptr);
std::vector<Sequent> apply_SCC(const Sequent& s, bool box_modality, int pos = 1);
std::vector<Sequent> apply_MID(const Sequent& s, bool box_modality, int pos = 1,
                               SideConditions* sc = nullptr);
std::vector<Sequent> apply_DCC(const Sequent& s, const FormulaPtr& cond);
std::vector<Sequent> apply_DBX_GT(const Sequent& s, const TermPtr& cofactor,
                                  SideConditions* sc = nullptr);

enum class StructuralOp { ChoiceSplit, Compose, TestIntro, MonotoneWeaken };
std::vector<Sequent> apply_structural(const Sequent& s, StructuralOp which,
                                      const RuleParams& params);

// ---------------------------------------------------------------------------
// Proof checking
// ---------------------------------------------------------------------------

struct Certificate {
  Sequent root;
  bool unconditional = true;
  std::map<std::string, int> rule_histogram;
  std::vector<std::string> obligations;       // trusted sequents, normalized
  std::vector<std::string> side_conditions;   // denominator != 0 facts
  std::vector<std::string> experimental;      // non-displayed rule variants used
  long wall_ms = 0;

  std::string to_text() const;
};

struct KernelOptions {
  ArithOptions arith;
};

/// Depth-first check; every rule application must regenerate exactly the
/// children's sequents. Throws CheckError / ProofRefuted on failure.
Certificate check_proof(const Sequent& root, const ProofNode& tree,
                        const KernelOptions& opt = {});

}  // namespace rddl
