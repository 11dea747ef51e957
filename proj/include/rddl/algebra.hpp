// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddl/polynomial.hpp"
#include "rddl/syntax.hpp"

namespace rddl {

struct ZeroDenominator : std::runtime_error {
  ZeroDenominator() : std::runtime_error("division by the zero polynomial") {}
};
struct ExitShapeError : std::runtime_error {
  explicit ExitShapeError(const std::string& w) : std::runtime_error(w) {}
};
struct DegenerateExit : std::runtime_error {
  explicit DegenerateExit(const std::string& w) : std::runtime_error(w) {}
};

/// Division side conditions (`q != 0`) collected while normalizing terms.
/// The kernel attaches these to the enclosing proof step.
struct SideConditions {
  std::set<std::string> nonzero;  // printed denominator polynomials
  void record(const Polynomial& q);
  void merge(const SideConditions& o) { nonzero.insert(o.nonzero.begin(), o.nonzero.end()); }
};

/// Reduced rational function p/q. The denominator is monic under graded lex
/// and gcd(p, q) is constant.
class RationalFunction {
 public:
  RationalFunction() : den_(Polynomial::constant(Rational(1))) {}
  explicit RationalFunction(Polynomial p) : num_(std::move(p)), den_(Polynomial::constant(Rational(1))) {}

  static RationalFunction make(Polynomial num, Polynomial den, SideConditions* sc = nullptr);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  bool is_polynomial() const { return den_.is_constant(); }

  RationalFunction operator+(const RationalFunction& o) const;
  RationalFunction operator-(const RationalFunction& o) const;
  RationalFunction operator-() const;
  RationalFunction operator*(const RationalFunction& o) const;
  RationalFunction operator/(const RationalFunction& o) const;  // throws ZeroDenominator

  /// Exact value equality: canonical forms when reduction completed, cross
  /// multiplication otherwise.
  bool operator==(const RationalFunction& o) const;
  bool operator!=(const RationalFunction& o) const { return !(*this == o); }

  std::set<std::string> variables() const;

  /// Evaluates at a state; sets *pole when |den| < pole_eps.
  double evaluate(const std::map<std::string, double>& st, bool* pole,
                  double pole_eps = 1e-12) const;

 private:
  Polynomial num_, den_;
};

/// ODE right-hand sides as reduced rational functions, in declaration order.
/// Variables without an entry are parameters (derivative 0).
struct VectorField {
  std::vector<std::pair<std::string, RationalFunction>> entries;

  static VectorField from_dynamics(const Dynamics& d, SideConditions* sc = nullptr);
  const RationalFunction* find(const std::string& var) const;
  std::set<std::string> domain() const;
};

/// Canonical form of a term; records each non-constant denominator in sc.
RationalFunction normalize(const TermPtr& t, SideConditions* sc = nullptr);

/// Term rendering with integer coefficients (rational scale folded into an
/// explicit fraction).
TermPtr to_term(const RationalFunction& f);
TermPtr to_term(const Polynomial& p);

RationalFunction partial_derivative(const RationalFunction& t, const std::string& var);
RationalFunction lie_derivative(const VectorField& f, const RationalFunction& g);
RationalFunction lie_derivative_n(const VectorField& f, const RationalFunction& g, unsigned n);

/// D_n(g): union over p < n of (/\_{k<=p} L^k g >= 0) /\ L^{p+1} g > 0.
FormulaPtr dii_disjunction(const VectorField& f, const RationalFunction& g, unsigned n);

/// The exit terms of an equational exit condition, sorted by side.
struct ExitTerms {
  TermPtr left_term, right_term;    // g(x) and g#(x#) as written
  RationalFunction left_lie, right_lie;  // L_f g and L_f# g#
};

/// Splits `exit` as a single cross-side equality and computes both Lie
/// derivatives; throws ExitShapeError / DegenerateExit.
ExitTerms split_equational_exit(const FormulaPtr& exit, const Dynamics& left,
                                const Dynamics& right, SideConditions* sc = nullptr);

/// Synchronized dynamics: left field unchanged, right field scaled by
/// L_f g / L_f# g#, constraint Q /\ Q#. Ratio 1 leaves the field unchanged.
Dynamics sync_vector_field(const RddFormula& a, SideConditions* sc = nullptr);

}  // namespace rddl
