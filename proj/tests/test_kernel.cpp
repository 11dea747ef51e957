// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "rddl/kernel.hpp"
#include "rddl/semantics.hpp"
#include "rddl/syntax.hpp"

using namespace rddl;

namespace {

Sequent seq(std::initializer_list<const char*> ctx, const char* goal) {
  std::vector<FormulaPtr> c;
  for (auto* f : ctx) c.push_back(parse_formula(f));
  return mk_sequent(std::move(c), parse_formula(goal));
}

std::string goal_of(const Sequent& s) { return print_formula(s.goal); }

}  // namespace

TEST_CASE("DI on the constant-acceleration invariant") {
  Sequent s = seq({"0 = x", "0 < v", "0 < a"}, "[{x' = v, v' = a}] v > 0");
  auto ps = apply_DI(s);
  REQUIRE(ps.size() == 2);
  CHECK(print_sequent(ps[0]) == "0 = x, v > 0, a > 0 |- v > 0");
  CHECK(print_sequent(ps[1]) == "0 = x, v > 0, a > 0 |- [{x' = v, v' = a}] a >= 0");
}

TEST_CASE("DI variants follow the paper's table") {
  auto ps = apply_DI(seq({"x = x#"}, "[{x' = v, x#' = v}] x = x#"));
  REQUIRE(ps.size() == 2);
  CHECK(goal_of(ps[1]) == "[{x' = v, x#' = v}] true");  // v - v = 0 folds

  SUBCASE("nonzero right sides are moved to the left") {
    auto qs = apply_DI(seq({"x >= 1"}, "[{x' = x}] x >= 1"));
    CHECK(goal_of(qs[0]) == "x - 1 >= 0");
    CHECK(goal_of(qs[1]) == "[{x' = x}] x >= 0");
  }
  SUBCASE("the constraint joins the first premise") {
    auto qs = apply_DI(seq({"v > 0"}, "[{v' = a & v <= V}] v > 0"));
    CHECK(print_sequent(qs[0]) == "v > 0, V >= v |- v > 0");
  }
  SUBCASE("mismatches") {
    CHECK_THROWS_AS(apply_DI(seq({}, "v > 0")), RuleMismatch);
    CHECK_THROWS_AS(apply_DI(seq({}, "<{v' = 1}> v > 0")), RuleMismatch);
    CHECK_THROWS_AS(apply_DI(seq({}, "[{v' = 1}; ?true] v > 0")), RuleMismatch);
    CHECK_THROWS_AS(apply_DI(seq({}, "[{v' = 1}] v > 0 & v >= 0")), RuleMismatch);
  }
}

TEST_CASE("DC cuts into the head dynamics, also under an rdd") {
  Sequent s = seq({"0 = x & x = x#", "0 < v & v = v#", "0 < a & a < a#"},
                  "[{x' = v, v' = a}; {x#' = v#, v#' = a#}; ?x = x#] v <= v#");
  auto ps = apply_DC(s, parse_formula("v > 0"));
  REQUIRE(ps.size() == 2);
  CHECK(goal_of(ps[0]) == "[{x' = v, v' = a}] v > 0");
  CHECK(goal_of(ps[1]) ==
        "[{x' = v, v' = a & v > 0}; {x#' = v#, v#' = a#}; ?x = x#] v# >= v");

  SUBCASE("a true cut leaves the goal unchanged") {
    auto qs = apply_DC(s, mk_true());
    CHECK(formula_equal(qs[1].goal, s.goal));
  }
  SUBCASE("no dynamics, no cut") {
    CHECK_THROWS_AS(apply_DC(seq({}, "[?true] true"), mk_true()), RuleMismatch);
    CHECK_THROWS_AS(apply_DC(seq({}, "x > 0"), mk_true()), RuleMismatch);
  }
}

TEST_CASE("DW keeps only the evolution domain") {
  Sequent s = seq({"0 < a"}, "[{v' = a & v > 0 & v <= v#}] a < a# * v / v#");
  auto ps = apply_DW(s);
  REQUIRE(ps.size() == 1);
  CHECK(print_sequent(ps[0]) == "v > 0 & v# >= v |- a# * v / v# > a");

  SUBCASE("Q = phi gives phi |- phi") {
    auto qs = apply_DW(seq({}, "[{v' = 1 & v > 0}] v > 0"));
    CHECK(print_sequent(qs[0]) == "v > 0 |- v > 0");
  }
  SUBCASE("diamond goals mismatch") {
    CHECK_THROWS_AS(apply_DW(seq({}, "<{v' = 1}> v > 0")), RuleMismatch);
  }
}

TEST_CASE("DII adds the goal to the evolution domain") {
  Sequent s = seq({"0 < v & v = v#"},
                  "[{x' = v, v' = a, x#' = v# * (v / v#), v#' = a# * (v / v#) & v > 0}]"
                  " v <= v#");
  auto ps = apply_DII(s, 1);
  REQUIRE(ps.size() == 2);
  CHECK(goal_of(ps[0]) == "v# - v >= 0");
  CHECK(goal_of(ps[1]) ==
        "[{x' = v, v' = a, x#' = v# * (v / v#), v#' = a# * (v / v#) & v > 0 & "
        "v# - v >= 0}] (a# * v - a * v#) / v# > 0");

  SUBCASE("constant goals produce a false derivative premise") {
    auto qs = apply_DII(seq({"c > 0"}, "[{x' = 1}] c >= 0"), 1);
    CHECK(goal_of(qs[1]) == "[{x' = 1 & c >= 0}] false");
  }
  SUBCASE("strict goals are not inductive invariants") {
    CHECK_THROWS_AS(apply_DII(seq({}, "[{x' = 1}] x > 0"), 1), RuleMismatch);
  }
  SUBCASE("drag step thirteen") {
    Sequent d = seq({"x = x# = 0 & v = v# > 1"},
                    "[{x' = v, v' = -v, x#' = v# * (v / v#), v#' = -v#^2 * (v / v#)"
                    " & (v > 0 & v# > 0) & v# > 1}] v >= v#");
    auto qs = apply_DII(d, 1);
    CHECK(goal_of(qs[1]) ==
          "[{x' = v, v' = -v, x#' = v# * (v / v#), v#' = -v#^2 * (v / v#) & "
          "v > 0 & v# > 0 & v# > 1 & v - v# >= 0}] v * v# - v > 0");
  }
}

TEST_CASE("SIM produces the four displayed premises") {
  Sequent s = seq({"x = 0 & x# = 0 & v = 0 & v# = 0"},
                  "[{x' = v, v' = 1}; {x#' = v#, v#' = 2}; ?x = x# & x# = 1] v <= v#");
  FormulaPtr r = parse_formula("x = x# & v# = q * v & x = v^2 / 2");
  auto ps = apply_SIM(s, r);
  REQUIRE(ps.size() == 4);
  CHECK(goal_of(ps[0]) ==
        "[{x' = v, v' = 1}] <{x#' = v#, v#' = 2}> "
        "(x = x# & v# = q * v & x = v^2 / 2)");
  CHECK(print_sequent(ps[1]).find(", x = x# & x# = 1 |- v# >= v") != std::string::npos);
  CHECK(goal_of(ps[2]) ==
        "[{x' = v, v' = 1}; {x#' = v#, v#' = 2}; ?x = x# & x# = 1] "
        "(x = x# & v# = q * v & x = v^2 / 2)");
  CHECK(goal_of(ps[3]) == "[?true] (x = x# & v# = q * v & x = v^2 / 2)");

  SUBCASE("false relation") {
    auto qs = apply_SIM(s, mk_false());
    CHECK(qs.size() == 4);
    CHECK(print_sequent(qs[3]) == "x = 0 & x# = 0 & v = 0 & v# = 0 |- [?true] false");
  }
  SUBCASE("non-rdd goals mismatch") {
    CHECK_THROWS_AS(apply_SIM(seq({}, "[{x' = 1}] true"), mk_true()), RuleMismatch);
  }
}

TEST_CASE("TS premises match the worked derivation") {
  Sequent s = seq({"0 = x & x = x#", "0 < v & v = v#", "0 < a & a < a#"},
                  "[{x' = v, v' = a & v > 0}; {x#' = v#, v#' = a#}; ?x = x#] v <= v#");
  auto ps = apply_TS(s);
  REQUIRE(ps.size() == 3);
  CHECK(goal_of(ps[0]) == "[?v > 0] x = x#");
  CHECK(goal_of(ps[1]) ==
        "[{x' = v, v' = a & v > 0}; {x#' = v#, v#' = a#}] v / v# > 0");
  CHECK(goal_of(ps[2]) ==
        "[{x' = v, v' = a, x#' = v# * (v / v#), v#' = a# * (v / v#) & v > 0}] v# >= v");

  SUBCASE("inequational exits are rejected") {
    Sequent t = seq({}, "[{x' = 1}; {x#' = 1}; ?x <= x#] true");
    CHECK_THROWS_AS(apply_TS(t), ExitShapeError);
  }
  SUBCASE("backward direction rebuilds the rdd form") {
    RddFormula a = parse_rdd(
        "rdd { x'=v, v'=a & v>0 || x#'=v#, v#'=a# } exit x = x# post v <= v#");
    Dynamics sync = sync_vector_field(a);
    Sequent back{s.context, mk_box(mk_dyn(sync), a.post)};
    auto qs = apply_TS(back, false, a);
    REQUIRE(qs.size() == 3);
    CHECK(formula_equal(qs[2].goal, desugar_rdd(a)));
    CHECK(formula_equal(qs[0].goal, ps[0].goal));
  }
}

TEST_CASE("MCS produces the five displayed premises") {
  Sequent s = seq({"0 < a & a <= a#", "0 = x & x = x#", "0 < v & v = v#"},
                  "[{x' = v, v' = a}; {x#' = v#, v#' = a#}; ?x = x#] v <= v#");
  bool experimental = true;
  auto ps = apply_MCS(s, {true, true, true, true}, nullptr, &experimental);
  REQUIRE(ps.size() == 5);
  CHECK(!experimental);
  CHECK(goal_of(ps[0]) == "[{x' = v, v' = a}; {x#' = v#, v#' = a#}; ?v = v#] x >= x#");
  CHECK(goal_of(ps[1]) == "[?true] v# >= v");
  CHECK(goal_of(ps[2]) == "[{x' = v, v' = a}] v > 0");
  CHECK(goal_of(ps[3]) == "[{x' = v, v' = a}] a >= 0");
  CHECK(goal_of(ps[4]) == "[{x#' = v#, v#' = a#}] a# >= 0");

  SUBCASE("strict postconditions are rejected") {
    Sequent t = seq({}, "[{x' = v, v' = a}; {x#' = v#, v#' = a#}; ?x = x#] v < v#");
    CHECK_THROWS_AS(apply_MCS(t, {true, true, true, true}), RuleMismatch);
  }
  SUBCASE("non-default flags are experimental") {
    bool exp2 = false;
    auto qs = apply_MCS(s, {false, true, true, true}, nullptr, &exp2);
    CHECK(exp2);
    CHECK(goal_of(qs[2]) == "[{x' = v, v' = a}] 0 > v");
  }
}

TEST_CASE("RDC inserts the cut test before the trailing one") {
  Sequent s = seq({"0 < v & v = v#"},
                  "[{x' = v, v' = a & v <= V}; {x#' = v#, v#' = a# & v# <= V};"
                  " ?v = V & v# = V] true");
  auto ps = apply_RDC(s, parse_formula("v = v#"));
  REQUIRE(ps.size() == 2);
  CHECK(goal_of(ps[0]) ==
        "[{x' = v, v' = a & V >= v}; {x#' = v#, v#' = a# & V >= v#}; ?v = v#; "
        "?v = V & v# = V] true");
  CHECK(goal_of(ps[1]) ==
        "[{x' = v, v' = a & V >= v}; {x#' = v#, v#' = a# & V >= v#}; "
        "?v = V & v# = V] v = v#");

  SUBCASE("the cut must relate the two sides") {
    CHECK_THROWS_AS(apply_RDC(s, parse_formula("v = 2 * v")), SideConditionFailed);
    CHECK_THROWS_AS(apply_RDC(s, parse_formula("v <= v#")), RuleMismatch);
  }
  SUBCASE("a trailing test is required") {
    CHECK_THROWS_AS(
        apply_RDC(seq({}, "[{x' = 1}; {y' = 1}] true"), parse_formula("x = y")),
        RuleMismatch);
  }
}

TEST_CASE("ECP repeats the once-side dynamics around the propagated exit") {
  Sequent s = seq({"0 < v"},
                  "[{x#' = v#, v#' = a# & v# <= V}; {x' = v, v' = a & v <= V};"
                  " ?v = V; {x' = v, v' = a * V / v}; ?x = x#] v <= v#");
  auto ps = apply_ECP(s);
  REQUIRE(ps.size() == 3);
  CHECK(goal_of(ps[0]) ==
        "[{x#' = v#, v#' = a# & V >= v#}; {x' = v, v' = a & V >= v}; ?x = x#; ?v = V; "
        "{x#' = v#, v#' = a# & V >= v#}; {x' = v, v' = a * V / v}; ?x = x#] v# >= v");
  CHECK(goal_of(ps[1]) == "[{x' = v, v' = a & V >= v}] v >= 0");
  CHECK(goal_of(ps[2]) ==
        "[{x' = v, v' = a & V >= v}; {x' = v, v' = a * V / v}] v >= 0");

  SUBCASE("missing middle test") {
    CHECK_THROWS_AS(apply_ECP(seq({}, "[{y' = 1}; {x' = 1}; {x' = 2}; ?x = y] true")),
                    RuleMismatch);
  }
  SUBCASE("trivial dynamics give vacuous monotonicity premises") {
    auto qs =
        apply_ECP(seq({}, "[{y' = 1}; {x' = 0}; ?x > 0; {x' = 0}; ?x = y] true"));
    CHECK(goal_of(qs[1]) == "[{x' = 0}] true");  // 0 >= 0 folds to true
  }
}

TEST_CASE("SCC swaps non-interfering components") {
  auto ps = apply_SCC(seq({}, "[{x' = 1}; {y' = 1}] x + y >= 0"), true, 1);
  REQUIRE(ps.size() == 1);
  CHECK(goal_of(ps[0]) == "[{y' = 1}; {x' = 1}] x + y >= 0");
  // a shared read-only parameter does not interfere
  auto qs = apply_SCC(
      seq({}, "[{x' = v, v' = a & v <= V}; {x#' = v#, v#' = a# & v# <= V}] true"),
      true, 1);
  CHECK(qs.size() == 1);
  // writing a variable the other side reads does
  CHECK_THROWS_AS(apply_SCC(seq({}, "[{x' = 1}; {y' = x}] true"), true, 1),
                  SideConditionFailed);
  CHECK_THROWS_AS(apply_SCC(seq({}, "[{x' = 1}; {x' = 2}] true"), true, 1),
                  SideConditionFailed);
  // diamond variant
  auto ds = apply_SCC(seq({}, "<{x' = 1}; {y' = 1}> true"), false, 1);
  CHECK(goal_of(ds[0]) == "<{y' = 1}; {x' = 1}> true");
  CHECK_THROWS_AS(apply_SCC(seq({}, "<{x' = 1}; {y' = 1}> true"), true, 1),
                  RuleMismatch);
}

TEST_CASE("MID merges identical dynamics up to normalization") {
  auto ps = apply_MID(
      seq({}, "[{x' = v, v' = a & v <= V}; {x' = v, v' = a & v <= V}] x >= 0"), true,
      1);
  REQUIRE(ps.size() == 1);
  CHECK(goal_of(ps[0]) == "[{x' = v, v' = a & V >= v}] x >= 0");

  SUBCASE("representation differences are normalized away") {
    SideConditions sc;
    auto qs = apply_MID(seq({}, "[{v' = (v * a) / a}; {v' = v}] v >= 0"), true, 1, &sc);
    CHECK(goal_of(qs[0]) == "[{v' = v * a / a}] v >= 0");
    CHECK(sc.nonzero.count("a") == 1);
  }
  SUBCASE("different constraints do not merge") {
    CHECK_THROWS_AS(
        apply_MID(seq({}, "[{x' = 1 & x <= 2}; {x' = 1 & x <= 3}] true"), true, 1),
        RuleMismatch);
  }
}

TEST_CASE("DCC splits an implication under the box") {
  Sequent s = seq({"x = x# = 0 & v = v# > 1"},
                  "[{v' = -v, v#' = -v#^2 * (v / v#) & v > 0 & v# > 0}]"
                  " (v# > 1 -> v# <= v)");
  auto ps = apply_DCC(s, parse_formula("v# > 1"));
  REQUIRE(ps.size() == 2);
  CHECK(goal_of(ps[0]) ==
        "[{v' = -v, v#' = -v#^2 * (v / v#) & v > 0 & v# > 0 & v# > 1}] v >= v#");
  CHECK(print_sequent(ps[1]) ==
        "v > 0 & v# > 0, 1 >= v# |- "
        "[{v' = -v, v#' = -v#^2 * (v / v#) & v > 0 & v# > 0}] 1 >= v#");

  SUBCASE("a true condition strips nothing and has a vacuous second premise") {
    Sequent t = seq({}, "[{v' = 1 & v > 0}] v >= 0");
    auto qs = apply_DCC(t, mk_true());
    REQUIRE(qs.size() == 2);
    CHECK(formula_equal(qs[0].goal, t.goal));
  }
  SUBCASE("non-implications mismatch") {
    CHECK_THROWS_AS(apply_DCC(seq({}, "[{v' = 1}] v >= 0"), parse_formula("v > 1")),
                    RuleMismatch);
  }
}

TEST_CASE("darboux premises match the drag derivation token for token") {
  SUBCASE("linear drag") {
    Sequent s = seq({"v > 0"}, "[{x' = v, v' = -v}] v > 0");
    auto ps = apply_DBX_GT(s, parse_term("-1"));
    REQUIRE(ps.size() == 1);
    CHECK(print_sequent(ps[0]) == "|- -v >= -1 * v");
  }
  SUBCASE("quadratic drag") {
    Sequent s = seq({"v# > 0"}, "[{x#' = v#, v#' = -(v#^2)}] v# > 0");
    auto ps = apply_DBX_GT(s, parse_term("-v#"));
    CHECK(print_sequent(ps[0]) == "|- -v#^2 >= -v# * v#");
  }
  SUBCASE("rational cofactors are rejected") {
    Sequent s = seq({"v > 0"}, "[{v' = -v}] v > 0");
    CHECK_THROWS_AS(apply_DBX_GT(s, parse_term("1 / v")), NonPolynomialCofactor);
  }
  SUBCASE("the invariant must appear among the hypotheses") {
    Sequent s = seq({"v >= 1"}, "[{v' = -v}] v > 0");
    CHECK_THROWS_AS(apply_DBX_GT(s, parse_term("-1")), RuleMismatch);
  }
}

TEST_CASE("structural rules") {
  SUBCASE("choice split distributes over a trailing program") {
    auto ps = apply_structural(seq({}, "[({x' = 1} ++ {x' = 2}); ?x > 0] x > 0"),
                               StructuralOp::ChoiceSplit, {});
    REQUIRE(ps.size() == 2);
    CHECK(goal_of(ps[0]) == "[{x' = 1}; ?x > 0] x > 0");
    CHECK(goal_of(ps[1]) == "[{x' = 2}; ?x > 0] x > 0");
    // sampled-semantics cross-check on a finite budget
    NumericBudget budget;
    budget.horizon = 0.5;
    budget.dyn_knots = 8;
    State st{{"x", 0.1}};
    FormulaPtr whole = parse_formula("[({x' = 1} ++ {x' = 2}); ?x > 0] x > 0");
    bool conj = sampled_truth(ps[0].goal, st, budget, 1e-9) &&
                sampled_truth(ps[1].goal, st, budget, 1e-9);
    CHECK(sampled_truth(whole, st, budget, 1e-9) == conj);
  }
  SUBCASE("the decaying-acceleration choice tree splits into five leaves") {
    const char* phi_d =
        "[ {x'=v, v'=a & v <= V}; {x#'=v#, v#'=a# & v# <= V}; ?x = x# "
        "++ (?v = V; ({x'=v, v'=a*V/v}; {x#'=v#, v#'=a# & v# <= V}; ?x = x# "
        "    ++ (?v# = V; {x'=v, v'=a*V/v}; {x#'=v#, v#'=a#*V/v#}; ?x = x#))) "
        "++ (?v# = V; ({x'=v, v'=a & v <= V}; {x#'=v#, v#'=a#*V/v#}; ?x = x# "
        "    ++ (?v = V; {x'=v, v'=a*V/v}; {x#'=v#, v#'=a#*V/v#}; ?x = x#)))] "
        "v <= v#";
    Sequent s = seq({}, phi_d);
    auto top = apply_structural(s, StructuralOp::ChoiceSplit, {});
    REQUIRE(top.size() == 2);
    auto top2 = apply_structural(top[0], StructuralOp::ChoiceSplit, {});
    REQUIRE(top2.size() == 2);
    // three top-level cases: top2[0], top2[1], top[1]
    int leaves = 1;  // top2[0] has no further choice
    for (const Sequent& branch : {top2[1], top[1]}) {
      auto t = apply_structural(branch, StructuralOp::TestIntro, {});
      REQUIRE(t.size() == 1);
      auto inner = apply_structural(t[0], StructuralOp::ChoiceSplit, {});
      leaves += static_cast<int>(inner.size());
    }
    CHECK(leaves == 5);
  }
  SUBCASE("test introduction moves the guard into the context") {
    auto ps = apply_structural(seq({"y > 0"}, "[?x > 0; {x' = 1}] x > 0"),
                               StructuralOp::TestIntro, {});
    CHECK(print_sequent(ps[0]) == "y > 0, x > 0 |- [{x' = 1}] x > 0");
    auto qs = apply_structural(seq({}, "[?true] x > 0"), StructuralOp::TestIntro, {});
    CHECK(print_sequent(qs[0]) == "|- x > 0");
  }
  SUBCASE("compose splits and merges") {
    RuleParams pos1;
    pos1.ints["pos"] = 1;
    auto ps = apply_structural(seq({}, "[{x' = 1}; {y' = 1}] x + y >= 0"),
                               StructuralOp::Compose, pos1);
    CHECK(goal_of(ps[0]) == "[{x' = 1}] [{y' = 1}] x + y >= 0");
    auto qs = apply_structural(ps[0], StructuralOp::Compose, {});
    CHECK(goal_of(qs[0]) == "[{x' = 1}; {y' = 1}] x + y >= 0");
  }
  SUBCASE("monotone weakening") {
    RuleParams p;
    p.formulas["ctx"] = parse_formula("v > 0");
    p.formulas["post"] = parse_formula("v >= 1");
    auto ps = apply_structural(seq({"v = 2"}, "[{v' = v}] v > 0"),
                               StructuralOp::MonotoneWeaken, p);
    REQUIRE(ps.size() == 3);
    CHECK(print_sequent(ps[0]) == "v = 2 |- v > 0");
    CHECK(print_sequent(ps[1]) == "v >= 1 |- v > 0");
    CHECK(print_sequent(ps[2]) == "v > 0 |- [{v' = v}] v >= 1");
    RuleParams none;
    CHECK_THROWS_AS(
        apply_structural(seq({}, "[{v' = 1}] true"), StructuralOp::MonotoneWeaken, none),
        RuleMismatch);
  }
}

TEST_CASE("check_proof") {
  SUBCASE("a single arithmetic leaf closes unconditionally") {
    ProofNode leaf;
    leaf.rule.rule = Rule::ARITH;
    Certificate cert = check_proof(seq({}, "1 > 0"), leaf);
    CHECK(cert.unconditional);
    CHECK(cert.rule_histogram.at("ARITH") == 1);
  }
  SUBCASE("unknown nonlinear facts become trusted obligations") {
    ProofNode leaf;
    leaf.rule.rule = Rule::ARITH;
    Certificate cert =
        check_proof(seq({}, "x^2 * y^2 + x^2 + y^2 + 1 >= 2 * x * y"), leaf);
    CHECK(!cert.unconditional);
    CHECK(cert.obligations.size() == 1);
    CHECK(cert.to_text().find("status: conditional") == 0);
  }
  SUBCASE("refuted leaves abort with a witness") {
    ProofNode leaf;
    leaf.rule.rule = Rule::ARITH;
    CHECK_THROWS_AS(check_proof(seq({"v = v#"}, "v < v#"), leaf), ProofRefuted);
  }
  SUBCASE("stored sequents are validated against the derived ones") {
    // a DI premise edited by hand: the subtree claims a different sequent
    ProofNode root;
    root.rule.rule = Rule::DI;
    ProofNode p1, p2;
    p1.rule.rule = Rule::ARITH;
    p1.sequent = seq({"v > 0"}, "v > 0");
    p2.rule.rule = Rule::DW;
    p2.sequent = seq({"v > 0"}, "[{v' = a}] a > 0");  // edited: should be a >= 0
    ProofNode p2leaf;
    p2leaf.rule.rule = Rule::ARITH;
    p2.children.push_back(p2leaf);
    root.children = {p1, p2};
    try {
      check_proof(seq({"v > 0"}, "[{v' = a}] v > 0"), root);
      FAIL("expected a mismatch");
    } catch (const CheckError& e) {
      CHECK(e.path.find("DW") != std::string::npos);
    }
  }
  SUBCASE("arity mismatches report the failing node") {
    ProofNode root;
    root.rule.rule = Rule::DI;  // produces two premises, gets one child
    ProofNode only;
    only.rule.rule = Rule::ARITH;
    root.children.push_back(only);
    CHECK_THROWS_AS(check_proof(seq({"v > 0"}, "[{v' = 1}] v > 0"), root), CheckError);
  }
  SUBCASE("certificates are deterministic up to the timing line") {
    ProofNode leaf;
    leaf.rule.rule = Rule::ARITH;
    auto strip = [](std::string text) { return text.substr(0, text.find("wall_ms:")); };
    Certificate a = check_proof(seq({"x >= 0"}, "x + 1 > 0"), leaf);
    Certificate b = check_proof(seq({"x >= 0"}, "x + 1 > 0"), leaf);
    CHECK(strip(a.to_text()) == strip(b.to_text()));
  }
}

TEST_CASE("sequent contexts must be modality-free") {
  CHECK_THROWS_AS(mk_sequent({parse_formula("[{x' = 1}] true")}, mk_true()),
                  std::invalid_argument);
}
