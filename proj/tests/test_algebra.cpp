// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "rddl/algebra.hpp"
#include "rddl/syntax.hpp"

using namespace rddl;

namespace {

RationalFunction rf(const std::string& text) { return normalize(parse_term(text)); }

// random rational-function generator used by the identity properties
struct Gen {
  std::mt19937_64 rng;
  std::vector<std::string> vars;

  explicit Gen(std::uint64_t seed, std::vector<std::string> vs)
      : rng(seed), vars(std::move(vs)) {}

  int irange(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng);
  }

  Polynomial poly(int max_terms = 4, int max_deg = 2) {
    Polynomial p;
    int terms = irange(1, max_terms);
    for (int t = 0; t < terms; ++t) {
      Monomial m;
      int deg = irange(0, max_deg);
      for (int d = 0; d < deg; ++d) m[vars[irange(0, static_cast<int>(vars.size()) - 1)]]++;
      p.add_term(m, Rational(irange(-4, 4)));
    }
    return p;
  }

  RationalFunction ratfun() {
    Polynomial den = poly(2, 1);
    if (den.is_zero()) den = Polynomial::constant(Rational(1));
    return RationalFunction::make(poly(), den);
  }

  VectorField field() {
    VectorField f;
    for (auto& v : vars) f.entries.emplace_back(v, RationalFunction(poly(3, 2)));
    return f;
  }
};

}  // namespace

TEST_CASE("normalize reduces and records division side conditions") {
  SideConditions sc;
  RationalFunction r = normalize(parse_term("(v# * v) / v#"), &sc);
  CHECK(r == rf("v"));
  CHECK(sc.nonzero.count("v#") == 1);

  CHECK(rf("x - x").is_zero());
  CHECK(rf("(t^2/2) - (t*t)/2").is_zero());
  CHECK_THROWS_AS(normalize(parse_term("1 / (x - x)")), ZeroDenominator);
}

TEST_CASE("normalize is idempotent and canonical") {
  auto a = rf("(v + 1) * (v - 1)");
  auto b = rf("v^2 - 1");
  CHECK(a == b);
  CHECK(normalize(to_term(a)) == a);
  // monic denominator
  auto c = rf("v / (2 * v# - 2)");
  CHECK(c.den().leading_coefficient() == Rational(1));
}

TEST_CASE("partial derivatives") {
  CHECK(partial_derivative(rf("v^2"), "v") == rf("2 * v"));
  CHECK(partial_derivative(rf("a# * v - a * v#"), "v") == rf("a#"));
  CHECK(partial_derivative(rf("3.5"), "x").is_zero());
  // quotient rule
  CHECK(partial_derivative(rf("v / v#"), "v#") == rf("-v / (v#^2)"));
}

TEST_CASE("lie derivatives on the case-study fields") {
  VectorField drag = VectorField::from_dynamics(parse_dynamics("v' = -v"));
  CHECK(lie_derivative(drag, rf("v")) == rf("-v"));

  VectorField car = VectorField::from_dynamics(parse_dynamics("x' = v, v' = a"));
  CHECK(lie_derivative(car, rf("x")) == rf("v"));
  CHECK(lie_derivative_n(car, rf("x"), 2) == rf("a"));

  VectorField sync = VectorField::from_dynamics(
      parse_dynamics("x' = v, v' = a, x#' = v# * (v / v#), v#' = a# * (v / v#)"));
  CHECK(lie_derivative(sync, rf("a# * v - a * v#")) ==
        rf("a# * a - a * (a# * v / v#)"));
}

TEST_CASE("iterated lie derivative") {
  VectorField drag = VectorField::from_dynamics(parse_dynamics("v' = -v"));
  CHECK(lie_derivative_n(drag, rf("v"), 3) == rf("-v"));
  VectorField any = VectorField::from_dynamics(parse_dynamics("x' = x^2"));
  CHECK(lie_derivative_n(any, rf("7"), 1).is_zero());
}

TEST_CASE("leibniz and linearity hold exactly on random instances") {
  Gen gen(20240809, {"x", "y", "z", "w"});
  for (int i = 0; i < 100; ++i) {
    CAPTURE(i);
    VectorField f = gen.field();
    RationalFunction g = gen.ratfun();
    RationalFunction h = gen.ratfun();
    RationalFunction prod = lie_derivative(f, g * h);
    CHECK(prod == lie_derivative(f, g) * h + g * lie_derivative(f, h));
    Rational alpha(gen.irange(-3, 3)), beta(gen.irange(-3, 3));
    RationalFunction lin =
        lie_derivative(f, g * RationalFunction(Polynomial::constant(alpha)) +
                              h * RationalFunction(Polynomial::constant(beta)));
    CHECK(lin == lie_derivative(f, g) * RationalFunction(Polynomial::constant(alpha)) +
                     lie_derivative(f, h) * RationalFunction(Polynomial::constant(beta)));
  }
}

TEST_CASE("dii disjunction") {
  VectorField car = VectorField::from_dynamics(parse_dynamics("x' = v, v' = a"));
  SUBCASE("n = 1 is exactly the first lie derivative > 0") {
    FormulaPtr d1 = dii_disjunction(car, rf("x"), 1);
    CHECK(formula_equal(d1, parse_formula("v > 0")));
  }
  SUBCASE("n = 2 is the displayed two-branch union") {
    FormulaPtr d2 = dii_disjunction(car, rf("x"), 2);
    CHECK(formula_equal(d2, parse_formula("v > 0 | (v >= 0 & a > 0)")));
  }
  SUBCASE("constant g collapses to false") {
    FormulaPtr d = dii_disjunction(car, rf("3"), 1);
    CHECK(d->kind == Formula::Kind::False);
  }
}

TEST_CASE("synchronized dynamics") {
  SUBCASE("constant acceleration (the worked example)") {
    RddFormula a = parse_rdd(
        "rdd { x'=v, v'=a & v>0 || x#'=v#, v#'=a# } exit x = x# post v <= v#");
    SideConditions sc;
    Dynamics sync = sync_vector_field(a, &sc);
    CHECK(print_dynamics(sync) ==
          "{x' = v, v' = a, x#' = v# * (v / v#), v#' = a# * (v / v#) & v > 0}");
    // the right entries equal the displayed quotient forms
    CHECK(normalize(sync.odes[2].second) == rf("(v# * v) / v#"));
    CHECK(normalize(sync.odes[3].second) == rf("(a# * v) / v#"));
    CHECK(sc.nonzero.count("v#") == 1);
  }
  SUBCASE("drag") {
    RddFormula a = parse_rdd(
        "rdd { x'=v, v'=-v || x#'=v#, v#'=-(v#^2) } exit x = x# post v# <= v | v# <= 1");
    Dynamics sync = sync_vector_field(a);
    CHECK(print_dynamics(sync) ==
          "{x' = v, v' = -v, x#' = v# * (v / v#), v#' = -v#^2 * (v / v#)}");
  }
  SUBCASE("identical one-variable dynamics have stretch ratio 1") {
    RddFormula a = parse_rdd("rdd { x'=1 || x#'=1 } exit x = x# post true");
    Dynamics sync = sync_vector_field(a);
    CHECK(print_dynamics(sync) == "{x' = 1, x#' = 1}");
  }
  SUBCASE("left coordinates are always the original left field") {
    RddFormula a = parse_rdd(
        "rdd { x'=v, v'=a & v>0 || x#'=v#, v#'=a# } exit x = x# post v <= v#");
    Dynamics sync = sync_vector_field(a);
    for (std::size_t i = 0; i < a.left.odes.size(); ++i) {
      CHECK(sync.odes[i].first == a.left.odes[i].first);
      CHECK(term_equal(sync.odes[i].second, a.left.odes[i].second));
    }
  }
  SUBCASE("exit shape errors") {
    RddFormula le = parse_rdd("rdd { x'=1 || x#'=1 } exit x <= x# post true");
    CHECK_THROWS_AS(sync_vector_field(le), ExitShapeError);
    RddFormula deg = parse_rdd("rdd { x'=1 || x#'=1 } exit x = V post true");
    CHECK_THROWS_AS(sync_vector_field(deg), DegenerateExit);
  }
}
