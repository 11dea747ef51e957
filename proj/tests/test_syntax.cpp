// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "rddl/syntax.hpp"

using namespace rddl;

TEST_CASE("dynamics body parses into an ordered ode map") {
  Dynamics d = parse_dynamics("x' = v, v' = 1");
  REQUIRE(d.odes.size() == 2);
  CHECK(d.odes[0].first == "x");
  CHECK(print_term(d.odes[0].second) == "v");
  CHECK(print_term(d.odes[1].second) == "1");
  CHECK(d.constraint->kind == Formula::Kind::True);
}

TEST_CASE("test construct") {
  ProgramPtr p = parse_program("?true");
  REQUIRE(p->kind == Program::Kind::Test);
  CHECK(p->test->kind == Formula::Kind::True);
}

TEST_CASE("rdd sugar parses both sides, exit, and post") {
  RddFormula a =
      parse_rdd("rdd { x'=v, v'=a & v>0 || x#'=v#, v#'=a# } exit x = x# post v <= v#");
  CHECK(a.left.odes.size() == 2);
  CHECK(print_formula(a.left.constraint) == "v > 0");
  CHECK(a.right.odes.size() == 2);
  CHECK(a.right.constraint->kind == Formula::Kind::True);
  CHECK(print_formula(a.exit) == "x = x#");
  // '<=' is stored side-swapped
  CHECK(print_formula(a.post) == "v# >= v");
}

TEST_CASE("rdd sides must not share differential variables") {
  CHECK_THROWS_AS(parse_rdd("rdd { x'=1 || x'=2 } exit x = 1 post true"), DisjointnessError);
}

TEST_CASE("desugared rdd is the boxed sequence with a trailing test") {
  RddFormula a = parse_rdd("rdd { x'=v, v'=1 || x#'=v#, v#'=2 } exit x = 1 & x# = 1 post v <= v#");
  FormulaPtr f = desugar_rdd(a);
  REQUIRE(f->kind == Formula::Kind::Box);
  // exactly one Test node, the last sequential component
  int tests = 0;
  ProgramPtr p = f->prog;
  REQUIRE(p->kind == Program::Kind::Seq);
  CHECK(p->b->kind == Program::Kind::Test);
  std::function<void(const ProgramPtr&)> count = [&](const ProgramPtr& q) {
    if (q->kind == Program::Kind::Test) ++tests;
    if (q->kind == Program::Kind::Seq || q->kind == Program::Kind::Choice) {
      count(q->a);
      count(q->b);
    }
  };
  count(p);
  CHECK(tests == 1);
  CHECK(print_formula(f) ==
        "[{x' = v, v' = 1}; {x#' = v#, v#' = 2}; ?x = 1 & x# = 1] v# >= v");

  SUBCASE("vacuous rdd") {
    RddFormula b = parse_rdd("rdd { x'=1 || y'=1 } exit true post true");
    CHECK(print_formula(desugar_rdd(b)) == "[{x' = 1}; {y' = 1}; ?true] true");
  }
}

TEST_CASE("chained comparisons become conjunctions") {
  FormulaPtr f = parse_formula("0 = x = x#");
  CHECK(print_formula(f) == "0 = x & x = x#");
  FormulaPtr g = parse_formula("v = v# > 1");
  CHECK(print_formula(g) == "v = v# & v# > 1");
}

TEST_CASE("or and implies are derived connectives") {
  FormulaPtr f = parse_formula("v# <= v | v# <= 1");
  // stored as a negated conjunction of the negations
  REQUIRE(f->kind == Formula::Kind::Not);
  REQUIRE(f->a->kind == Formula::Kind::And);
  CHECK(print_formula(f->a->a) == "v# > v");
  CHECK(print_formula(f->a->b) == "v# > 1");
  // the implication form carries the same two conjuncts, swapped
  FormulaPtr g = parse_formula("v# > 1 -> v# <= v");
  REQUIRE(g->kind == Formula::Kind::Not);
  CHECK(formula_equal(g->a->a, f->a->b));
  CHECK(formula_equal(g->a->b, f->a->a));
}

TEST_CASE("free variables") {
  CHECK(free_variables(parse_term("a# * v / v#")) ==
        std::set<std::string>{"a#", "v", "v#"});
  CHECK(free_variables(parse_formula("forall x. x >= 0")).empty());
  CHECK(free_variables(parse_program("{x'=v, v'=a & v>0}")) ==
        std::set<std::string>{"a", "v", "x"});
}

TEST_CASE("written variables are the ode-bound ones") {
  CHECK(written_variables(parse_program("{x'=v, v'=a & v <= V}")) ==
        std::set<std::string>{"v", "x"});
  CHECK(written_variables(parse_program("?v = V")).empty());
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_formula("x >< 1");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.position > 0);
  }
  CHECK_THROWS_AS(parse_term("x ^ 1.5"), SyntaxError);
  CHECK_THROWS_AS(parse_program("{x'=1 & [?true]true}"), SyntaxError);  // modal constraint
  CHECK_THROWS_AS(parse_dynamics("x'=1, x'=2"), SyntaxError);
}

TEST_CASE("round trip: parse after print is identity on parsed formulas") {
  const char* samples[] = {
      "x + 1 * v - (x - v) / 2 ^ 3 = 0",
      "-(v^2) * (v / v#) >= -v",
      "0 = x & x = x# & 0 < v",
      "!(x = 1) & (v >= 0 | v# > 1)",
      "[{x' = v, v' = a & v > 0}; {x#' = v#, v#' = a#}; ?x = x#] v <= v#",
      "[?v > 0] (v > 0 -> [{v' = -v}] v > 0)",
      "<{x' = 1} ++ ?(x = 0)> x >= 0",
      "forall z. z * z >= 0",
      "rdd { x'=v, v'=1 || x#'=v#, v#'=2 } exit x = x# post v <= v#",
  };
  for (const char* s : samples) {
    CAPTURE(s);
    FormulaPtr f = parse_formula(s);
    FormulaPtr g = parse_formula(print_formula(f));
    CHECK(formula_equal(f, g));
  }
}

TEST_CASE("round trip for terms and programs") {
  const char* terms[] = {"x", "1.25", "-v", "(a + b) * c", "a - b - c", "a / (b / c)",
                         "v^2 - 2 * v + 1", "-(v * v#)"};
  for (const char* s : terms) {
    CAPTURE(s);
    TermPtr t = parse_term(s);
    CHECK(term_equal(t, parse_term(print_term(t))));
  }
  const char* progs[] = {"?x = 1; {x' = 1}", "({x' = 1} ++ ?true); {y' = 2 & y <= 5}"};
  for (const char* s : progs) {
    CAPTURE(s);
    ProgramPtr p = parse_program(s);
    CHECK(program_equal(p, parse_program(print_program(p))));
  }
}

TEST_CASE("negation of comparisons flips them; equations keep a Not node") {
  CHECK(print_formula(mk_not(parse_formula("v > 0"))) == "0 >= v");
  CHECK(print_formula(mk_not(parse_formula("v >= 0"))) == "0 > v");
  FormulaPtr ne = mk_not(parse_formula("x = 1"));
  CHECK(ne->kind == Formula::Kind::Not);
  CHECK(print_formula(ne) == "!(x = 1)");
}

TEST_CASE("constant comparisons fold") {
  CHECK(parse_formula("0 > 0")->kind == Formula::Kind::False);
  CHECK(parse_formula("1 >= 0")->kind == Formula::Kind::True);
  CHECK(parse_formula("true & 2 = 2")->kind == Formula::Kind::True);
}
