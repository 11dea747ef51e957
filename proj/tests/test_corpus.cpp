// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <future>
#include <sstream>

#include "rddl/script.hpp"

using namespace rddl;

namespace {

std::string corpus_path(const std::string& name) {
  return std::string(RDDL_SOURCE_DIR) + "/corpus/" + name;
}

std::string histogram_line(const Certificate& c) {
  std::ostringstream os;
  bool first = true;
  for (auto& [k, v] : c.rule_histogram) {
    if (!first) os << " ";
    first = false;
    os << k << "=" << v;
  }
  return os.str();
}

}  // namespace

TEST_CASE("every manifest script checks with its pinned status") {
  for (const ManifestEntry& e : corpus_manifest()) {
    CAPTURE(e.file);
    ProofScript script = load_script(corpus_path(e.file));
    Certificate cert = check_proof(script.sequent, script.proof);
    CHECK(cert.unconditional == e.expect_unconditional);
    CHECK(static_cast<int>(cert.obligations.size()) == e.expected_obligations);
    if (!e.pinned_histogram.empty()) CHECK(histogram_line(cert) == e.pinned_histogram);
  }
}

TEST_CASE("the worked example keeps the expected derivation shape") {
  ProofScript script = load_script(corpus_path("phi_C.rdl"));
  // root differential cut, then a three-premise time stretch
  CHECK(script.proof.rule.rule == Rule::DC);
  REQUIRE(script.proof.children.size() == 2);
  const ProofNode& ts = script.proof.children[1];
  CHECK(ts.rule.rule == Rule::TS);
  REQUIRE(ts.children.size() == 3);
  CHECK(ts.children[2].rule.rule == Rule::DII);
  // the root sequent is the published formula
  CHECK(print_sequent(script.sequent) ==
        "0 = x & x = x#, v > 0 & v = v#, a > 0 & a# > a |- "
        "[{x' = v, v' = a}; {x#' = v#, v#' = a#}; ?x = x#] v# >= v");
}

TEST_CASE("the edited script is refuted with a node path") {
  ProofScript script = load_script(corpus_path("phi_C_broken.rdl"));
  try {
    check_proof(script.sequent, script.proof);
    FAIL("expected a refutation");
  } catch (const ProofRefuted& e) {
    CHECK(!e.path.empty());
    CHECK(!e.witness.empty());
  }
}

TEST_CASE("the corpus runner parallelizes with deterministic results") {
  auto manifest = corpus_manifest();
  std::vector<std::future<std::string>> futures;
  for (auto& e : manifest) {
    futures.push_back(std::async(std::launch::async, [e] {
      ProofScript script = load_script(corpus_path(e.file));
      Certificate cert = check_proof(script.sequent, script.proof);
      std::string text = cert.to_text();
      return e.file + ": " + text.substr(0, text.find('\n'));
    }));
  }
  std::vector<std::string> parallel;
  for (auto& f : futures) parallel.push_back(f.get());
  std::vector<std::string> serial;
  for (auto& e : manifest) {
    ProofScript script = load_script(corpus_path(e.file));
    Certificate cert = check_proof(script.sequent, script.proof);
    std::string text = cert.to_text();
    serial.push_back(e.file + ": " + text.substr(0, text.find('\n')));
  }
  CHECK(parallel == serial);
}

TEST_CASE("script loading errors") {
  CHECK_THROWS_AS(parse_script("sequent { assume true goal true } (FROB)"), UnknownRule);
  CHECK_THROWS_AS(parse_script("sequent { assume goal true } (ARITH)"), SyntaxError);
  CHECK_THROWS_AS(parse_script("param x sequent { assume true goal true } (ARITH"),
                  SyntaxError);
  // arity mismatches surface during checking with the failing path
  ProofScript s = parse_script("sequent { assume 1 > 0 goal [{x' = 1}] x >= 0 } (DI)");
  CHECK_THROWS_AS(check_proof(s.sequent, s.proof), CheckError);
}

TEST_CASE("script parameters carry decimal bindings") {
  ProofScript s = parse_script(
      "param sqrt2 = 1.4142135623730951\n"
      "param V\n"
      "sequent { assume true goal 1 > 0 } (ARITH)");
  REQUIRE(s.params.size() == 2);
  CHECK(s.params[0].name == "sqrt2");
  REQUIRE(s.params[0].value.has_value());
  CHECK(!s.params[1].value.has_value());
  Certificate cert = check_proof(s.sequent, s.proof);
  CHECK(cert.unconditional);
}

TEST_CASE("rdd model files parse with boxes and assumptions") {
  RddModel m = load_rdd_model(std::string(RDDL_SOURCE_DIR) +
                              "/corpus/models/example_3_2_flipped.rdd");
  REQUIRE(m.rdd.has_value());
  CHECK(print_formula(m.rdd->post) == "v >= v#");
  Box box = m.full_box();
  CHECK(box.count("x") == 1);
  CHECK(box.count("v#") == 1);
}
