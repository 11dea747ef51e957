// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rddl/rational.hpp"

namespace rddl {

/// Monomial: variable name -> positive exponent. Empty map is the unit.
using Monomial = std::map<std::string, unsigned>;

unsigned monomial_degree(const Monomial& m);
Monomial monomial_mul(const Monomial& a, const Monomial& b);
/// Componentwise min (gcd of monomials).
Monomial monomial_gcd(const Monomial& a, const Monomial& b);
/// a / b; requires b divides a.
Monomial monomial_div(const Monomial& a, const Monomial& b);
bool monomial_divides(const Monomial& b, const Monomial& a);

/// Graded lexicographic order over alphabetically sorted variable names.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Sparse multivariate polynomial with exact rational coefficients.
class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational, GradedLex>;

  Polynomial() = default;
  explicit Polynomial(const Rational& c);
  static Polynomial variable(const std::string& name);
  static Polynomial constant(const Rational& c);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()

  const Terms& terms() const { return terms_; }
  std::set<std::string> variables() const;
  unsigned total_degree() const;

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(const Rational& c) const;
  Polynomial pow(unsigned e) const;

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }
  bool operator!=(const Polynomial& o) const { return terms_ != o.terms_; }

  Polynomial derivative(const std::string& var) const;
  Polynomial substitute(const std::string& var, const Polynomial& value) const;

  /// Leading monomial/coefficient under graded lex. Requires nonzero.
  const Monomial& leading_monomial() const;
  const Rational& leading_coefficient() const;

  /// Largest monomial dividing every term (unit for the zero polynomial).
  Monomial content_monomial() const;
  /// Divides all terms by m; requires m to divide each term.
  Polynomial divide_monomial(const Monomial& m) const;

  /// Exact division check: returns quotient if divisor divides *this exactly.
  static bool try_divide(const Polynomial& num, const Polynomial& den, Polynomial* quot);

  void add_term(const Monomial& m, const Rational& c);

  double evaluate(const std::map<std::string, double>& state) const;
  Rational evaluate_exact(const std::map<std::string, Rational>& state) const;

 private:
  Terms terms_;
};

/// Multivariate gcd via primitive Euclid on a chosen main variable.
/// Result is normalized to have positive leading coefficient.
Polynomial polynomial_gcd(const Polynomial& a, const Polynomial& b);

}  // namespace rddl
