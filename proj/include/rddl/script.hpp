// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rddl/kernel.hpp"
#include "rddl/semantics.hpp"
#include "rddl/syntax.hpp"

namespace rddl {

struct UnknownRule : std::runtime_error {
  explicit UnknownRule(const std::string& w) : std::runtime_error(w) {}
};

struct ScriptParam {
  std::string name;
  std::optional<Rational> value;  // decimal binding, e.g. for sqrt2
};

/// A machine-checkable proof script: parameter preamble, root sequent and a
/// proof tree in the parenthesized rule format.
struct ProofScript {
  std::vector<ScriptParam> params;
  Sequent sequent;
  ProofNode proof;
};

ProofScript parse_script(const std::string& text);
ProofScript load_script(const std::string& path);

/// Model for the falsifier: an RDD formula plus an initial-region description.
struct RddModel {
  std::vector<ScriptParam> params;
  FormulaPtr gamma;            // 'assume' clause; true when missing
  Box box;                     // explicit 'box' entries only
  std::optional<RddFormula> rdd;

  /// Box covering every free variable (defaults to [-10,10]), with parameter
  /// bindings pinned.
  Box full_box(double lo = -10, double hi = 10) const;
  /// gamma with parameter bindings conjoined.
  FormulaPtr full_gamma() const;
};

RddModel parse_rdd_model(const std::string& text);
RddModel load_rdd_model(const std::string& path);

/// Single-dynamics model file for simulation.
Dynamics load_dynamics_model(const std::string& path);

struct ManifestEntry {
  std::string file;             // relative to the corpus directory
  bool expect_unconditional;
  int expected_obligations;
  std::string pinned_histogram;  // empty = not pinned
};

/// Shipped scripts with their pinned certificate expectations.
std::vector<ManifestEntry> corpus_manifest();

std::string read_file(const std::string& path);

}  // namespace rddl
