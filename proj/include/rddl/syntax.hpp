// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddl/rational.hpp"

namespace rddl {

struct Term;
struct Formula;
struct Program;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;
using ProgramPtr = std::shared_ptr<const Program>;

// ---------------------------------------------------------------------------
// Terms: rational-function expressions over named real variables.
// Variable names match [A-Za-z][A-Za-z0-9_]* with an optional '#' suffix
// marking sharp variables.
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Variable, Constant, Neg, Add, Sub, Mul, Div, Pow };
  Kind kind;
  std::string name;   // Variable
  Rational value;     // Constant (nonnegative by construction)
  TermPtr a, b;       // operands
  unsigned exponent = 0;  // Pow
};

TermPtr mk_var(const std::string& name);
TermPtr mk_const(const Rational& value);  // negative values become Neg(Constant)
TermPtr mk_neg(TermPtr t);
TermPtr mk_add(TermPtr a, TermPtr b);
TermPtr mk_sub(TermPtr a, TermPtr b);
TermPtr mk_mul(TermPtr a, TermPtr b);
TermPtr mk_div(TermPtr a, TermPtr b);
TermPtr mk_pow(TermPtr a, unsigned e);

bool term_equal(const TermPtr& a, const TermPtr& b);

// ---------------------------------------------------------------------------
// Formulas. Normal form (established at construction):
//   * comparisons use only {=, >=, >}; '<'/'<=' are stored side-swapped,
//   * 'a | b' is stored as !(!a & !b), 'a -> b' as !(a & !b),
//   * '!' over a comparison flips it ('!' survives only over '=' and '&'),
//   * comparisons between two literal constants fold to true/false,
//   * 'true & f' folds to f, 'false & f' to false.
// ---------------------------------------------------------------------------

enum class CmpOp { Eq, Ge, Gt };

struct Dynamics {
  // ordered ODE system: variable -> right-hand side
  std::vector<std::pair<std::string, TermPtr>> odes;
  FormulaPtr constraint;  // evolution domain; 'true' when omitted

  std::set<std::string> ode_variables() const;
};

struct Formula {
  enum class Kind { True, False, Cmp, Not, And, Forall, Box, Diamond };
  Kind kind;
  TermPtr lhs, rhs;  // Cmp
  CmpOp op = CmpOp::Eq;
  FormulaPtr a, b;   // Not(a), And(a,b), Box/Diamond body in a
  std::string var;   // Forall
  ProgramPtr prog;   // Box/Diamond
};

struct Program {
  enum class Kind { Test, Dyn, Seq, Choice };
  Kind kind;
  FormulaPtr test;
  Dynamics dyn;
  ProgramPtr a, b;
};

FormulaPtr mk_true();
FormulaPtr mk_false();
FormulaPtr mk_cmp(TermPtr l, CmpOp op, TermPtr r);
FormulaPtr mk_cmp_raw(TermPtr l, const std::string& op, TermPtr r);  // accepts < and <=
FormulaPtr mk_not(FormulaPtr f);
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_forall(const std::string& var, FormulaPtr f);
FormulaPtr mk_box(ProgramPtr p, FormulaPtr f);
FormulaPtr mk_diamond(ProgramPtr p, FormulaPtr f);

ProgramPtr mk_test(FormulaPtr f);
ProgramPtr mk_dyn(Dynamics d);
ProgramPtr mk_seq(ProgramPtr a, ProgramPtr b);
ProgramPtr mk_choice(ProgramPtr a, ProgramPtr b);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);
bool program_equal(const ProgramPtr& a, const ProgramPtr& b);
bool dynamics_equal(const Dynamics& a, const Dynamics& b);

/// Tears apart !(X & !Y) / !(!X & !Y); yields the matched pieces.
bool match_implies(const FormulaPtr& f, FormulaPtr* antecedent, FormulaPtr* consequent);
bool match_or(const FormulaPtr& f, FormulaPtr* left, FormulaPtr* right);

bool is_first_order(const FormulaPtr& f);       // no modalities
bool is_quantifier_free(const FormulaPtr& f);

/// Flattens top-level conjunctions into a list.
std::vector<FormulaPtr> conjuncts(const FormulaPtr& f);

// ---------------------------------------------------------------------------
// RDD formulas
// ---------------------------------------------------------------------------

struct RddFormula {
  Dynamics left, right;
  FormulaPtr exit, post;

  /// Throws DisjointnessError unless the two ODE variable sets are disjoint.
  RddFormula(Dynamics l, Dynamics r, FormulaPtr e, FormulaPtr p);
};

/// [ {left}; {right}; ?exit ] post
FormulaPtr desugar_rdd(const RddFormula& a);

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

std::set<std::string> free_variables(const TermPtr& t);
std::set<std::string> free_variables(const FormulaPtr& f);
std::set<std::string> free_variables(const ProgramPtr& p);
std::set<std::string> free_variables(const Dynamics& d);
/// Variables written by a program (ODE-bound variables).
std::set<std::string> written_variables(const ProgramPtr& p);

// ---------------------------------------------------------------------------
// Parser / printer
// ---------------------------------------------------------------------------

struct SyntaxError : std::runtime_error {
  std::size_t position;
  std::string expected;
  SyntaxError(std::size_t pos, const std::string& what, const std::string& exp = "")
      : std::runtime_error("syntax error at " + std::to_string(pos) + ": " + what),
        position(pos), expected(exp) {}
};

struct DisjointnessError : std::runtime_error {
  explicit DisjointnessError(const std::string& what) : std::runtime_error(what) {}
};

TermPtr parse_term(const std::string& text);
FormulaPtr parse_formula(const std::string& text);
ProgramPtr parse_program(const std::string& text);
RddFormula parse_rdd(const std::string& text);
/// Brace-less dynamics body: "x' = v, v' = 1 & v > 0".
Dynamics parse_dynamics(const std::string& text);

std::string print_term(const TermPtr& t);
std::string print_formula(const FormulaPtr& f);
std::string print_program(const ProgramPtr& p);
std::string print_dynamics(const Dynamics& d);

}  // namespace rddl
