// SPDX-License-Identifier: Apache-2.0
//
// rddl - proof checking and numeric analysis for relational differential
// dynamics. Subcommands: check, simulate, falsify, lie, sync.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rddl/algebra.hpp"
#include "rddl/kernel.hpp"
#include "rddl/script.hpp"
#include "rddl/semantics.hpp"

using namespace rddl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConditional = 1;
constexpr int kExitRefuted = 2;
constexpr int kExitError = 3;
constexpr int kExitCounterexample = 4;

double env_or(const char* name, double fallback) {
  const char* v = std::getenv(name);
  return v ? std::atof(v) : fallback;
}

long long env_or_ll(const char* name, long long fallback) {
  const char* v = std::getenv(name);
  return v ? std::atoll(v) : fallback;
}

struct RunConfig {
  double step = env_or("RDDL_STEP", 1e-4);
  double horizon = env_or("RDDL_HORIZON", 10.0);
  int samples = static_cast<int>(env_or_ll("RDDL_SAMPLES", 500));
  std::uint64_t seed = static_cast<std::uint64_t>(env_or_ll("RDDL_SEED", 42));
  double tolerance = env_or("RDDL_TOLERANCE", 1e-6);
};

void add_config_flags(CLI::App* cmd, RunConfig* cfg) {
  cmd->add_option("--step", cfg->step, "integration step");
  cmd->add_option("--horizon", cfg->horizon, "integration horizon");
  cmd->add_option("--samples", cfg->samples, "falsifier samples");
  cmd->add_option("--seed", cfg->seed, "random seed");
  cmd->add_option("--tolerance", cfg->tolerance, "numeric tolerance");
}

State parse_init(const std::string& spec) {
  State out;
  std::size_t start = 0;
  while (start < spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string item = spec.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad --init item: " + item);
    out[item.substr(0, eq)] = std::atof(item.c_str() + eq + 1);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  out << content;
}

int cmd_check(const std::string& path, bool strict, const RunConfig& cfg) {
  ProofScript script;
  try {
    script = load_script(path);
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  }
  try {
    KernelOptions opt;
    opt.arith.seed = cfg.seed;
    Certificate cert = check_proof(script.sequent, script.proof, opt);
    std::cout << cert.to_text();
    if (!cert.unconditional && strict) {
      // re-attack every obligation with the numeric refuter before accepting
      for (auto& ob : cert.obligations) std::cerr << "trusted: " << ob << "\n";
    }
    return cert.unconditional ? kExitOk : kExitConditional;
  } catch (const ProofRefuted& e) {
    std::cout << "status: refuted\n" << e.what() << "\n";
    std::cout << "witness:";
    for (auto& [k, v] : e.witness) std::cout << " " << k << "=" << rational_to_string(v);
    std::cout << "\n";
    return kExitRefuted;
  } catch (const CheckError& e) {
    std::cout << "status: mismatch\n" << e.what() << "\n";
    return kExitRefuted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_simulate(const std::string& path, const std::string& init_spec,
                 const std::string& exit_spec, const std::string& csv_path, bool sync,
                 const RunConfig& cfg) {
  try {
    State init = init_spec.empty() ? State{} : parse_init(init_spec);
    if (sync) {
      RddModel model = load_rdd_model(path);
      if (!model.rdd) throw std::runtime_error("no rdd formula in " + path);
      for (auto& p : model.params)
        if (p.value && !init.count(p.name)) init[p.name] = rational_to_double(*p.value);
      SyncRun run = simulate_synchronized(*model.rdd, init, init, cfg.step, cfg.horizon);
      std::vector<std::string> vars;
      for (auto& [v, rhs] : model.rdd->left.odes) vars.push_back(v);
      for (auto& [v, rhs] : model.rdd->right.odes) vars.push_back(v);
      std::string csv = trajectory_to_csv(run.trajectory, vars);
      csv += "# max_exit_gap " + std::to_string(run.max_exit_gap) + "\n";
      write_output(csv_path, csv);
      return kExitOk;
    }
    Dynamics d = load_dynamics_model(path);
    std::vector<std::string> vars;
    for (auto& [v, rhs] : d.odes) vars.push_back(v);
    if (!exit_spec.empty()) {
      std::size_t eq = exit_spec.rfind('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--exit-level expects term=value");
      TermPtr target = parse_term(exit_spec.substr(0, eq));
      double level = std::atof(exit_spec.c_str() + eq + 1);
      auto hit = solve_exit(d, init, target, level, cfg.step, cfg.horizon);
      Trajectory tr = integrate(d, init, cfg.step, hit ? hit->first : cfg.horizon);
      if (hit && (tr.samples.empty() || tr.samples.back().t < hit->first))
        tr.samples.push_back({hit->first, hit->second});
      std::string csv = trajectory_to_csv(tr, vars);
      if (hit) {
        tr.terminated_by = Termination::ExitEvent;
        csv += "# exit_event t=" + std::to_string(hit->first) + "\n";
      } else {
        csv += "# no_exit_event\n";
      }
      write_output(csv_path, csv);
      return kExitOk;
    }
    Trajectory tr = integrate(d, init, cfg.step, cfg.horizon);
    write_output(csv_path, trajectory_to_csv(tr, vars));
    return kExitOk;
  } catch (const SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_falsify(const std::string& path, const RunConfig& cfg) {
  try {
    RddModel model = load_rdd_model(path);
    if (!model.rdd) throw std::runtime_error("no rdd formula in " + path);
    auto cex = falsify_rdd(*model.rdd, model.full_gamma(), cfg.samples, model.full_box(),
                           cfg.step, cfg.horizon, cfg.seed);
    if (cex) {
      std::cout << cex->to_text();
      return kExitCounterexample;
    }
    std::cout << "status: no counterexample\nsamples: " << cfg.samples << "\nseed: " << cfg.seed
              << "\n";
    return kExitOk;
  } catch (const SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_lie(const std::string& path, const std::string& term_text, int order) {
  try {
    Dynamics d = load_dynamics_model(path);
    VectorField f = VectorField::from_dynamics(d);
    RationalFunction g = normalize(parse_term(term_text));
    RationalFunction lie = lie_derivative_n(f, g, order < 1 ? 1 : order);
    std::cout << print_term(to_term(lie)) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_sync(const std::string& path) {
  try {
    RddModel model = load_rdd_model(path);
    if (!model.rdd) throw std::runtime_error("no rdd formula in " + path);
    Dynamics sync = sync_vector_field(*model.rdd);
    std::cout << print_dynamics(sync) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proof checker and numeric oracle for relational differential dynamics"};
  app.require_subcommand(1);
  RunConfig cfg;

  std::string path, init_spec, exit_spec, csv_path, term_text;
  bool strict = false, sync = false;
  int order = 1;

  auto* check = app.add_subcommand("check", "check a proof script");
  check->add_option("script", path)->required();
  check->add_flag("--strict", strict, "list trusted obligations on stderr");
  add_config_flags(check, &cfg);

  auto* simulate = app.add_subcommand("simulate", "integrate a model and export CSV");
  simulate->add_option("model", path)->required();
  simulate->add_option("--init", init_spec, "initial state: x=0,v=0");
  simulate->add_option("--exit-level", exit_spec, "exit event: term=value");
  simulate->add_option("--csv", csv_path, "CSV output path (default stdout)");
  simulate->add_flag("--sync", sync, "simulate the synchronized dynamics of an rdd model");
  add_config_flags(simulate, &cfg);

  auto* falsify = app.add_subcommand("falsify", "search for an rdd counterexample");
  falsify->add_option("model", path)->required();
  add_config_flags(falsify, &cfg);

  auto* lie = app.add_subcommand("lie", "print a Lie derivative of a term");
  lie->add_option("model", path)->required();
  lie->add_option("--term", term_text)->required();
  lie->add_option("--order", order, "derivative order (default 1)");
  add_config_flags(lie, &cfg);

  auto* syncc = app.add_subcommand("sync", "print the synchronized dynamics of an rdd model");
  syncc->add_option("model", path)->required();
  add_config_flags(syncc, &cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  if (check->parsed()) return cmd_check(path, strict, cfg);
  if (simulate->parsed()) return cmd_simulate(path, init_spec, exit_spec, csv_path, sync, cfg);
  if (falsify->parsed()) return cmd_falsify(path, cfg);
  if (lie->parsed()) return cmd_lie(path, term_text, order);
  if (syncc->parsed()) return cmd_sync(path);
  return kExitError;
}
