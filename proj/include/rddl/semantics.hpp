// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddl/syntax.hpp"

namespace rddl {

using State = std::map<std::string, double>;

struct PoleEncountered : std::runtime_error {
  double time;
  explicit PoleEncountered(double t)
      : std::runtime_error("denominator vanished at t = " + std::to_string(t)), time(t) {}
};
struct DomainViolatedAtStart : std::runtime_error {
  DomainViolatedAtStart() : std::runtime_error("initial state violates the evolution domain") {}
};
struct MonotonicityViolated : std::runtime_error {
  double time;
  std::string side;
  MonotonicityViolated(double t, const std::string& s)
      : std::runtime_error("exit term not strictly monotonic on side " + s + " at t = " +
                           std::to_string(t)), time(t), side(s) {}
};
struct MismatchedEndpoints : std::runtime_error {
  explicit MismatchedEndpoints(const std::string& w) : std::runtime_error(w) {}
};
struct NonMonotoneSamples : std::runtime_error {
  NonMonotoneSamples() : std::runtime_error("sampled time stretch is not strictly increasing") {}
};
struct GammaUnsatisfiedInBox : std::runtime_error {
  GammaUnsatisfiedInBox() : std::runtime_error("no gamma-satisfying state found in the box") {}
};
struct UnsupportedFormula : std::runtime_error {
  explicit UnsupportedFormula(const std::string& w) : std::runtime_error(w) {}
};

enum class Termination { DomainViolation, Horizon, ExitEvent };

struct TrajSample {
  double t;
  State x;
};

struct Trajectory {
  std::vector<TrajSample> samples;  // strictly increasing times, starting at 0
  Termination terminated_by = Termination::Horizon;
  double event_time = 0.0;  // meaningful for ExitEvent

  const State& final_state() const { return samples.back().x; }
  double final_time() const { return samples.back().t; }
};

/// Strict-inequality comparisons carry a slack of 1e-9; positive slack reads
/// generously ("holds up to tolerance"), negative slack strictly.
double eval_term_numeric(const TermPtr& t, const State& st, double pole_eps = 1e-12);
bool eval_formula_numeric(const FormulaPtr& f, const State& st, double slack = 1e-9);

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Classical RK4 with fixed step. Stops at the first constraint violation
/// (boundary refined by bisection) or at the horizon. Recorded samples are
/// decimated to at most max_samples; the boundary sample is always recorded.
Trajectory integrate(const Dynamics& d, const State& x0, double step, double horizon,
                     int max_samples = 4096);

/// First time the target term crosses `level`, refined to |residual| <= 1e-10.
std::optional<std::pair<double, State>> solve_exit(const Dynamics& d, const State& x0,
                                                   const TermPtr& target, double level,
                                                   double step, double horizon);

// ---------------------------------------------------------------------------
// Time stretching
// ---------------------------------------------------------------------------

struct SampledStretch {
  std::vector<double> s;  // [0, t] grid
  std::vector<double> k;  // k(s) values, k(0) = 0
};

/// Canonical stretch k = (g#_f#)^{-1} o g_f on a grid, by numeric inversion.
SampledStretch canonical_time_stretch(const RddFormula& a, const State& x0, const State& x0s,
                                      double t, double ts, int grid, double step);

struct StretchReport {
  double max_residual = 0.0;
  std::map<std::string, double> per_variable;
};

/// Integrates d# stretched by k (kdot from finite differences of the grid)
/// and reports max_t |psi_k(t) - psi#(k(t))| componentwise.
StretchReport check_stretched_solution(const Dynamics& d_sharp, const SampledStretch& k,
                                       const State& x0s, double step);

struct SyncRun {
  Trajectory trajectory;      // combined state over both variable sets
  double max_exit_gap = 0.0;  // max |g - g#| along the run
};

/// Integrates the synchronized dynamics and measures |g(Phi) - g#(Phi#)|.
SyncRun simulate_synchronized(const RddFormula& a, const State& x0, const State& x0s,
                              double step, double horizon);

// ---------------------------------------------------------------------------
// Falsification
// ---------------------------------------------------------------------------

using Box = std::map<std::string, std::pair<double, double>>;

struct Counterexample {
  int sample_index = 0;
  double t_left = 0.0, t_right = 0.0;
  State initial;
  State exit_states;  // union of both sides at their exit times
  FormulaPtr violated;
  std::string to_text() const;  // stable key-value rendering
};

/// Samples gamma-satisfying initial pairs (solving linear equalities exactly,
/// rejection-sampling the rest), enumerates exit-time pairs where E holds,
/// returns the first pair falsifying B. Deterministic given seed.
std::optional<Counterexample> falsify_rdd(const RddFormula& a, const FormulaPtr& gamma,
                                          int samples, const Box& box, double step,
                                          double horizon, std::uint64_t seed);

struct SimCheckReport {
  std::vector<std::string> simulation_violations;
  std::vector<std::string> support_violations;
  std::vector<std::string> essential_inclusion_violations;
  bool clean() const {
    return simulation_violations.empty() && support_violations.empty() &&
           essential_inclusion_violations.empty();
  }
};

using Lattice = std::map<std::string, std::vector<double>>;

/// Grid falsifier for the simulation clauses. A clean report is evidence,
/// not proof.
SimCheckReport check_simulation_numeric(const FormulaPtr& r, const RddFormula& a,
                                        const Lattice& grid, double step, double horizon,
                                        double tol = 1e-6);

// ---------------------------------------------------------------------------
// Generic sampled program semantics (fuzzing support)
// ---------------------------------------------------------------------------

struct NumericBudget {
  double step = 1e-2;
  double horizon = 2.0;
  int dyn_knots = 24;   // successor states sampled per dynamics
  double slack = 1e-9;
};

/// Enumerates sampled successor states of a hybrid program.
void enumerate_successors(const ProgramPtr& p, const State& start, const NumericBudget& opt,
                          const std::function<void(const State&)>& yield);

/// Sampled truth of an arbitrary formula (modalities enumerate successors).
/// Positive slack = generous, negative = strict.
bool sampled_truth(const FormulaPtr& f, const State& st, const NumericBudget& opt, double slack);

/// Draws up to `count` states in `box` satisfying gamma; linear equalities in
/// gamma are solved exactly, the rest handled by rejection sampling.
/// Throws GammaUnsatisfiedInBox when rejection keeps failing.
std::vector<State> sample_states(const FormulaPtr& gamma, const Box& box, int count,
                                 std::uint64_t seed, int max_rejects_factor = 10000);

/// CSV with header t,<var1>,<var2>,... in dynamics declaration order.
std::string trajectory_to_csv(const Trajectory& tr, const std::vector<std::string>& vars);

}  // namespace rddl
