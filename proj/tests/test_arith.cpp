// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "rddl/arith.hpp"
#include "rddl/semantics.hpp"
#include "rddl/syntax.hpp"

using namespace rddl;

namespace {

std::vector<FormulaPtr> hyps(std::initializer_list<const char*> hs) {
  std::vector<FormulaPtr> out;
  for (auto* h : hs) out.push_back(parse_formula(h));
  return out;
}

ArithVerdict prove(std::initializer_list<const char*> hs, const char* goal) {
  return prove_arith(hyps(hs), parse_formula(goal));
}

}  // namespace

TEST_CASE("equality substitution closes the initial-state facts") {
  auto v = prove({"0 = x", "x = x#", "0 < v", "v = v#", "0 < a", "a < a#"}, "x = x#");
  CHECK(v.proved());
}

TEST_CASE("denominator clearing with an in-context sign") {
  // reduces to v * (v# - 1) > 0
  auto v = prove({"v > 0", "v# > 1", "v# <= v"}, "-(v#^2) * (v / v#) < -v");
  CHECK(v.proved());
}

TEST_CASE("refuted goals come with exact witnesses") {
  auto v = prove({"v = v#"}, "v < v#");
  REQUIRE(v.refuted());
  // the witness satisfies the hypotheses and falsifies the goal exactly
  CHECK(eval_formula_exact(parse_formula("v = v#"), v.witness));
  CHECK(!eval_formula_exact(parse_formula("v < v#"), v.witness));
}

TEST_CASE("an absent denominator sign is never assumed") {
  // aV/v >= 0 is false for v < 0, so it must not be Proved from these
  auto v = prove({"a > 0", "V >= 1"}, "a * V / v >= 0");
  CHECK(!v.proved());
  CHECK(v.refuted());  // the sampler finds a negative v
}

TEST_CASE("square hypotheses combine with nonnegativity") {
  auto v = prove({"v >= 0", "v^2 > 0", "a > 0", "V >= 1"}, "a * V / v > 0");
  CHECK(v.proved());
}

TEST_CASE("tight inequality chains become equalities") {
  auto v = prove({"v# <= V", "V <= v", "v <= v#", "a > 0", "a# - a > 0", "V >= 1"},
                 "a# * v^2 - a * V * v# > 0");
  CHECK(v.proved());
}

TEST_CASE("nonlinear factoring through known signs") {
  CHECK(prove({"v > 0", "a < a#"}, "a# * v - a * v > 0").proved());
  CHECK(prove({"a > 0", "a# >= a", "v >= 0"}, "v^2 * (a# - a) >= 0").proved());
}

TEST_CASE("strict goals on boundaries are refuted, nonstrict proved") {
  CHECK(prove({"x >= 0"}, "x >= 0").proved());
  auto v = prove({"x >= 0"}, "x > 0");
  CHECK(v.refuted());
  CHECK(eval_formula_exact(parse_formula("x >= 0"), v.witness));
}

TEST_CASE("disjunctive goals split into branches") {
  CHECK(prove({"v# > 1", "v# <= v"}, "v# <= v | v# <= 1").proved());
  CHECK(prove({"v# <= 1"}, "v# <= v | v# <= 1").proved());
  CHECK(prove({"true"}, "x = 0 | x = 0 | true").proved());
}

TEST_CASE("modal and quantified input is rejected") {
  CHECK_THROWS_AS(prove({"true"}, "[{x' = 1}] x > 0"), NonArithmeticInput);
  CHECK_THROWS_AS(prove({"forall x. x >= 0"}, "x >= 0"), NonArithmeticInput);
}

TEST_CASE("proved verdicts survive heavy sampling") {
  // soundness spot-check: no sampled point in the hypothesis region violates
  // a Proved goal
  std::vector<std::pair<std::vector<FormulaPtr>, FormulaPtr>> cases;
  auto add = [&](std::initializer_list<const char*> hs, const char* goal) {
    cases.emplace_back(hyps(hs), parse_formula(goal));
  };
  add({"v > 0", "v# > 1", "v# <= v"}, "-(v#^2) * (v / v#) < -v");
  add({"v > 0", "v# - v >= 0", "a# * v > a * v#"}, "(a# * v - a * v#) / v# > 0");
  add({"0 = x", "x = x#", "0 < v", "v = v#", "0 < a", "a < a#"}, "v# >= v");
  for (auto& [hs2, goal] : cases) {
    ArithVerdict verdict = prove_arith(hs2, goal);
    REQUIRE(verdict.proved());
    FormulaPtr conj = mk_true();
    for (auto& h : hs2) conj = mk_and(conj, h);
    Box box;
    for (auto& v : free_variables(mk_and(conj, goal))) box[v] = {-10.0, 10.0};
    // 1e5 samples per the module contract
    auto pts = sample_states(conj, box, 100000, 7);
    for (auto& p : pts) {
      bool ok;
      try {
        ok = eval_formula_numeric(goal, p, 1e-9);
      } catch (const PoleEncountered&) {
        continue;
      }
      if (!ok) {
        CAPTURE(print_formula(goal));
        FAIL("sampled violation of a Proved verdict");
      }
    }
  }
}

TEST_CASE("obligation ledger deduplicates by normalized form") {
  ObligationLedger ledger;
  auto a = ledger.register_obligation("v > 0 |- v^3 + v > 0");
  auto b = ledger.register_obligation("v > 0 |- v^3 + v > 0");
  auto c = ledger.register_obligation("|- 1 > 0");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(ledger.entries().size() == 2);
}
