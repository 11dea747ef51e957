// SPDX-License-Identifier: Apache-2.0
#include "rddl/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rddl/algebra.hpp"

namespace rddl {

namespace {

constexpr double kPoleEps = 1e-12;
constexpr double kSlack = 1e-9;

// ---------------------------------------------------------------------------
// Compiled evaluation (flat postfix programs, variable indices resolved once)
// ---------------------------------------------------------------------------

struct TermProg {
  struct Op {
    enum Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow } kind;
    double c = 0;
    int var = 0;
    unsigned e = 0;
  };
  std::vector<Op> ops;

  double eval(const std::vector<double>& v, bool* pole) const {
    double stack[64];
    int sp = 0;
    for (const Op& op : ops) {
      switch (op.kind) {
        case Op::Const: stack[sp++] = op.c; break;
        case Op::Var: stack[sp++] = v[op.var]; break;
        case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
        case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
        case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
        case Op::Div: {
          --sp;
          if (std::abs(stack[sp]) < kPoleEps) {
            if (pole) *pole = true;
            return 0.0;
          }
          stack[sp - 1] /= stack[sp];
          break;
        }
        case Op::Pow: stack[sp - 1] = std::pow(stack[sp - 1], static_cast<double>(op.e)); break;
      }
    }
    return stack[0];
  }
};

void compile_term_rec(const TermPtr& t, const std::map<std::string, int>& idx, TermProg& out) {
  using Op = TermProg::Op;
  switch (t->kind) {
    case Term::Kind::Variable: {
      auto it = idx.find(t->name);
      if (it == idx.end())
        throw std::invalid_argument("state does not cover variable '" + t->name + "'");
      out.ops.push_back(Op{Op::Var, 0, it->second, 0});
      break;
    }
    case Term::Kind::Constant:
      out.ops.push_back(Op{Op::Const, rational_to_double(t->value), 0, 0});
      break;
    case Term::Kind::Neg:
      compile_term_rec(t->a, idx, out);
      out.ops.push_back(Op{Op::Neg, 0, 0, 0});
      break;
    case Term::Kind::Pow:
      compile_term_rec(t->a, idx, out);
      out.ops.push_back(Op{Op::Pow, 0, 0, t->exponent});
      break;
    default: {
      compile_term_rec(t->a, idx, out);
      compile_term_rec(t->b, idx, out);
      Op::Kind k = t->kind == Term::Kind::Add   ? Op::Add
                   : t->kind == Term::Kind::Sub ? Op::Sub
                   : t->kind == Term::Kind::Mul ? Op::Mul
                                                : Op::Div;
      out.ops.push_back(Op{k, 0, 0, 0});
    }
  }
}

TermProg compile_term(const TermPtr& t, const std::map<std::string, int>& idx) {
  TermProg p;
  compile_term_rec(t, idx, p);
  return p;
}

struct FormProg {
  enum Kind { True, False, Cmp, Not, And } kind = True;
  CmpOp op = CmpOp::Eq;
  TermProg lhs, rhs;
  std::vector<FormProg> children;

  // positive slack: generous, negative: strict
  bool eval(const std::vector<double>& v, double slack, bool* pole) const {
    switch (kind) {
      case True: return true;
      case False: return false;
      case Cmp: {
        double l = lhs.eval(v, pole), r = rhs.eval(v, pole);
        if (pole && *pole) return false;
        double m = l - r;
        if (op == CmpOp::Eq) return slack > 0 && std::abs(m) <= slack;
        return m >= -slack;  // Ge and Gt share the slack treatment
      }
      case Not: return !children[0].eval(v, -slack, pole);
      case And:
        return children[0].eval(v, slack, pole) && children[1].eval(v, slack, pole);
    }
    return false;
  }

  // first comparison violated at v (traversal order); null if none
  const FormProg* first_violated(const std::vector<double>& v, double slack) const {
    bool pole = false;
    switch (kind) {
      case True: return nullptr;
      case False: return this;
      case Cmp:
      case Not: return eval(v, slack, &pole) ? nullptr : this;
      case And: {
        const FormProg* a = children[0].first_violated(v, slack);
        if (a) return a;
        return children[1].first_violated(v, slack);
      }
    }
    return nullptr;
  }
};

FormProg compile_formula(const FormulaPtr& f, const std::map<std::string, int>& idx) {
  FormProg p;
  switch (f->kind) {
    case Formula::Kind::True: p.kind = FormProg::True; break;
    case Formula::Kind::False: p.kind = FormProg::False; break;
    case Formula::Kind::Cmp:
      p.kind = FormProg::Cmp;
      p.op = f->op;
      p.lhs = compile_term(f->lhs, idx);
      p.rhs = compile_term(f->rhs, idx);
      break;
    case Formula::Kind::Not:
      p.kind = FormProg::Not;
      p.children.push_back(compile_formula(f->a, idx));
      break;
    case Formula::Kind::And:
      p.kind = FormProg::And;
      p.children.push_back(compile_formula(f->a, idx));
      p.children.push_back(compile_formula(f->b, idx));
      break;
    default:
      throw UnsupportedFormula("numeric evaluation supports first-order, quantifier-free formulas");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Compiled dynamics + RK4 core
// ---------------------------------------------------------------------------

struct CompiledDyn {
  std::vector<std::string> order;  // ODE variables first, then parameters
  std::map<std::string, int> idx;
  int n_ode = 0;
  std::vector<TermProg> rhs;
  FormProg constraint;

  CompiledDyn(const Dynamics& d, const State& x0) {
    for (auto& [v, r] : d.odes) {
      idx[v] = static_cast<int>(order.size());
      order.push_back(v);
    }
    n_ode = static_cast<int>(order.size());
    auto add_var = [&](const std::string& v) {
      if (!idx.count(v)) {
        idx[v] = static_cast<int>(order.size());
        order.push_back(v);
      }
    };
    for (auto& v : free_variables(d)) add_var(v);
    for (auto& [v, val] : x0) add_var(v);
    for (auto& [v, r] : d.odes) rhs.push_back(compile_term(r, idx));
    constraint = compile_formula(d.constraint, idx);
  }

  std::vector<double> pack(const State& s) const {
    std::vector<double> v(order.size(), 0.0);
    for (int i = 0; i < n_ode; ++i)
      if (!s.count(order[i]))
        throw std::invalid_argument("state does not cover ODE variable '" + order[i] + "'");
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto it = s.find(order[i]);
      if (it != s.end()) v[i] = it->second;
    }
    return v;
  }

  State unpack(const std::vector<double>& v) const {
    State s;
    for (std::size_t i = 0; i < order.size(); ++i) s[order[i]] = v[i];
    return s;
  }

  void deriv(const std::vector<double>& y, std::vector<double>& dy, double t) const {
    bool pole = false;
    for (int i = 0; i < n_ode; ++i) {
      dy[i] = rhs[i].eval(y, &pole);
      if (pole) throw PoleEncountered(t);
    }
  }

  // one classical RK4 step of size h
  void rk4(std::vector<double>& y, double h, double t) const {
    int n = n_ode;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp = y;
    deriv(y, k1, t);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    deriv(tmp, k2, t);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    deriv(tmp, k3, t);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    deriv(tmp, k4, t);
    for (int i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }

  bool sat(const std::vector<double>& y, double slack = kSlack) const {
    bool pole = false;
    bool ok = constraint.eval(y, slack, &pole);
    return ok && !pole;
  }
};

// Full-resolution raw trajectory; kept only while a sample is processed.
struct RawTrajectory {
  const CompiledDyn* cd = nullptr;
  double step = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  Termination term = Termination::Horizon;

  double final_time() const { return times.back(); }

  // state at arbitrary 0 <= t <= final_time(), via one partial RK4 step
  std::vector<double> at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t / step), times.size() - 2);
    while (k + 1 < times.size() - 1 && times[k + 1] <= t) ++k;
    while (k > 0 && times[k] > t) --k;
    std::vector<double> y = states[k];
    double dt = t - times[k];
    if (dt > 1e-15) cd->rk4(y, dt, times[k]);
    return y;
  }
};

RawTrajectory integrate_raw(const CompiledDyn& cd, const std::vector<double>& y0, double step,
                            double horizon) {
  RawTrajectory out;
  out.cd = &cd;
  out.step = step;
  if (!cd.sat(y0)) throw DomainViolatedAtStart();
  std::vector<double> y = y0;
  double t = 0;
  out.times.push_back(0);
  out.states.push_back(y);
  const double tiny = step * 1e-9;
  while (t < horizon - tiny) {
    double h = std::min(step, horizon - t);
    std::vector<double> y1 = y;
    cd.rk4(y1, h, t);
    if (!cd.sat(y1)) {
      // refine the boundary: largest tau in [0,h] keeping the constraint,
      // aiming at |margin| <= 1e-10 on the first violated comparison
      double lo = 0, hi = h;
      const FormProg* atom = cd.constraint.first_violated(y1, kSlack);
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        std::vector<double> ym = y;
        if (mid > 1e-15) cd.rk4(ym, mid, t);
        bool ok = cd.sat(ym);
        (ok ? lo : hi) = mid;
        if (hi - lo < 1e-14) break;
        if (ok && atom && atom->kind == FormProg::Cmp) {
          bool pole = false;
          double m = atom->lhs.eval(ym, &pole) - atom->rhs.eval(ym, &pole);
          if (std::abs(m) <= 1e-10) { lo = mid; break; }
        }
      }
      std::vector<double> yb = y;
      if (lo > 1e-15) cd.rk4(yb, lo, t);
      if (t + lo > out.times.back()) {
        out.times.push_back(t + lo);
        out.states.push_back(yb);
      }
      out.term = Termination::DomainViolation;
      return out;
    }
    y = y1;
    t += h;
    out.times.push_back(t);
    out.states.push_back(y);
  }
  out.term = Termination::Horizon;
  return out;
}

Trajectory thin(const RawTrajectory& raw, int max_samples) {
  Trajectory tr;
  std::size_t n = raw.times.size();
  std::size_t stride = std::max<std::size_t>(1, n / std::max(1, max_samples));
  for (std::size_t i = 0; i < n; i += stride)
    tr.samples.push_back({raw.times[i], raw.cd->unpack(raw.states[i])});
  if ((n - 1) % stride != 0)
    tr.samples.push_back({raw.times[n - 1], raw.cd->unpack(raw.states[n - 1])});
  tr.terminated_by = raw.term;
  return tr;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public term/formula evaluation over State maps
// ---------------------------------------------------------------------------

double eval_term_numeric(const TermPtr& t, const State& st, double pole_eps) {
  switch (t->kind) {
    case Term::Kind::Variable: {
      auto it = st.find(t->name);
      if (it == st.end())
        throw std::invalid_argument("state does not cover variable '" + t->name + "'");
      return it->second;
    }
    case Term::Kind::Constant: return rational_to_double(t->value);
    case Term::Kind::Neg: return -eval_term_numeric(t->a, st, pole_eps);
    case Term::Kind::Add:
      return eval_term_numeric(t->a, st, pole_eps) + eval_term_numeric(t->b, st, pole_eps);
    case Term::Kind::Sub:
      return eval_term_numeric(t->a, st, pole_eps) - eval_term_numeric(t->b, st, pole_eps);
    case Term::Kind::Mul:
      return eval_term_numeric(t->a, st, pole_eps) * eval_term_numeric(t->b, st, pole_eps);
    case Term::Kind::Div: {
      double d = eval_term_numeric(t->b, st, pole_eps);
      if (std::abs(d) < pole_eps) throw PoleEncountered(0.0);
      return eval_term_numeric(t->a, st, pole_eps) / d;
    }
    case Term::Kind::Pow:
      return std::pow(eval_term_numeric(t->a, st, pole_eps), static_cast<double>(t->exponent));
  }
  throw std::logic_error("unreachable");
}

bool eval_formula_numeric(const FormulaPtr& f, const State& st, double slack) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Cmp: {
      double m = eval_term_numeric(f->lhs, st) - eval_term_numeric(f->rhs, st);
      if (f->op == CmpOp::Eq) return slack > 0 && std::abs(m) <= slack;
      return m >= -slack;
    }
    case Formula::Kind::Not: return !eval_formula_numeric(f->a, st, -slack);
    case Formula::Kind::And:
      return eval_formula_numeric(f->a, st, slack) && eval_formula_numeric(f->b, st, slack);
    default:
      throw UnsupportedFormula("eval_formula_numeric handles first-order formulas only");
  }
}

// ---------------------------------------------------------------------------
// integrate / solve_exit
// ---------------------------------------------------------------------------

Trajectory integrate(const Dynamics& d, const State& x0, double step, double horizon,
                     int max_samples) {
  CompiledDyn cd(d, x0);
  RawTrajectory raw = integrate_raw(cd, cd.pack(x0), step, horizon);
  return thin(raw, max_samples);
}

std::optional<std::pair<double, State>> solve_exit(const Dynamics& d, const State& x0,
                                                   const TermPtr& target, double level,
                                                   double step, double horizon) {
  CompiledDyn cd(d, x0);
  TermProg tp = compile_term(target, cd.idx);
  RawTrajectory raw = integrate_raw(cd, cd.pack(x0), step, horizon);
  bool pole = false;
  auto val = [&](const std::vector<double>& y) { return tp.eval(y, &pole) - level; };
  double s0 = val(raw.states.front());
  if (std::abs(s0) <= 1e-10 * std::max(1.0, std::abs(level)))
    return std::make_pair(0.0, cd.unpack(raw.states.front()));
  for (std::size_t i = 1; i < raw.times.size(); ++i) {
    double s1 = val(raw.states[i]);
    if ((s0 < 0) != (s1 < 0) || s1 == 0.0) {
      double lo = raw.times[i - 1], hi = raw.times[i];
      double slo = s0;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double sm = val(raw.at(mid));
        if (std::abs(sm) <= 1e-10) return std::make_pair(mid, cd.unpack(raw.at(mid)));
        if ((sm < 0) == (slo < 0)) { lo = mid; slo = sm; }
        else hi = mid;
        if (hi - lo < 1e-15) break;
      }
      double mid = 0.5 * (lo + hi);
      return std::make_pair(mid, cd.unpack(raw.at(mid)));
    }
    s0 = s1;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Time stretching
// ---------------------------------------------------------------------------

SampledStretch canonical_time_stretch(const RddFormula& a, const State& x0, const State& x0s,
                                      double t, double ts, int grid, double step) {
  ExitTerms et = split_equational_exit(a.exit, a.left, a.right);
  double g0 = eval_term_numeric(et.left_term, x0);
  double gs0 = eval_term_numeric(et.right_term, x0s);
  if (std::abs(g0 - gs0) > 1e-9 * (1 + std::abs(g0)))
    throw MismatchedEndpoints("g(x0) and g#(x0#) differ at the start");

  CompiledDyn cl(a.left, x0), cr(a.right, x0s);
  RawTrajectory left = integrate_raw(cl, cl.pack(x0), step, t);
  RawTrajectory right = integrate_raw(cr, cr.pack(x0s), step, ts);
  if (left.final_time() < t - step || right.final_time() < ts - step)
    throw MismatchedEndpoints("trajectories leave the domain before the requested endpoints");

  // monotonicity of both exit terms along their flows, same sign on each side
  auto sign_of = [&](const RationalFunction& lie, const RawTrajectory& raw, const CompiledDyn& cd,
                     const char* side) {
    int sign = 0;
    std::size_t stride = std::max<std::size_t>(1, raw.times.size() / 256);
    for (std::size_t i = 0; i < raw.times.size(); i += stride) {
      bool pole = false;
      double v = lie.evaluate(cd.unpack(raw.states[i]), &pole);
      if (pole || std::abs(v) < 1e-12) throw MonotonicityViolated(raw.times[i], side);
      int s = v > 0 ? 1 : -1;
      if (sign == 0) sign = s;
      else if (sign != s) throw MonotonicityViolated(raw.times[i], side);
    }
    return sign;
  };
  int sl = sign_of(et.left_lie, left, cl, "left");
  int sr = sign_of(et.right_lie, right, cr, "right");
  if (sl != sr) throw MonotonicityViolated(0.0, "right");

  TermProg gl = compile_term(et.left_term, cl.idx);
  TermProg gr = compile_term(et.right_term, cr.idx);
  bool pole = false;
  double g_end = gl.eval(left.at(t), &pole);
  double gs_end = gr.eval(right.at(ts), &pole);
  if (std::abs(g_end - gs_end) > 1e-6 * (1 + std::abs(g_end)))
    throw MismatchedEndpoints("exit terms differ at the requested endpoints");

  // invert s# -> g#(psi#(s#)) at each grid value of g(psi(s))
  SampledStretch out;
  double dir = sr;
  auto gs_at = [&](double tau) { return gr.eval(right.at(tau), &pole) * dir; };
  for (int i = 0; i <= grid; ++i) {
    double s = t * i / grid;
    if (i == 0) {
      out.s.push_back(0);
      out.k.push_back(0);
      continue;
    }
    double target = gl.eval(left.at(s), &pole) * dir;
    double lo = 0, hi = ts;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      if (gs_at(mid) < target) lo = mid;
      else hi = mid;
      if (hi - lo < 1e-14 * std::max(1.0, ts)) break;
    }
    out.s.push_back(s);
    out.k.push_back(0.5 * (lo + hi));
  }
  return out;
}

StretchReport check_stretched_solution(const Dynamics& d_sharp, const SampledStretch& k,
                                       const State& x0s, double step) {
  std::size_t n = k.s.size();
  if (n < 2) throw NonMonotoneSamples();
  for (std::size_t i = 1; i < n; ++i)
    if (!(k.k[i] > k.k[i - 1])) throw NonMonotoneSamples();

  // kdot by finite differences on the grid
  std::vector<double> kdot(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) kdot[i] = (k.k[1] - k.k[0]) / (k.s[1] - k.s[0]);
    else if (i == n - 1) kdot[i] = (k.k[n - 1] - k.k[n - 2]) / (k.s[n - 1] - k.s[n - 2]);
    else kdot[i] = (k.k[i + 1] - k.k[i - 1]) / (k.s[i + 1] - k.s[i - 1]);
  }
  auto kdot_at = [&](double t) {
    if (t <= k.s.front()) return kdot.front();
    if (t >= k.s.back()) return kdot.back();
    std::size_t j = std::upper_bound(k.s.begin(), k.s.end(), t) - k.s.begin();
    double w = (t - k.s[j - 1]) / (k.s[j] - k.s[j - 1]);
    return (1 - w) * kdot[j - 1] + w * kdot[j];
  };

  CompiledDyn cd(d_sharp, x0s);
  // dense reference solution of the unstretched dynamics
  RawTrajectory ref = integrate_raw(cd, cd.pack(x0s), step, k.k.back() + step);

  // integrate the stretched field with the time-dependent scale
  std::vector<double> y = cd.pack(x0s);
  int n_ode = cd.n_ode;
  auto rk4_scaled = [&](std::vector<double>& yy, double t0, double h) {
    std::vector<double> k1(n_ode), k2(n_ode), k3(n_ode), k4(n_ode), tmp = yy;
    auto f = [&](const std::vector<double>& v, std::vector<double>& dv, double tt) {
      cd.deriv(v, dv, tt);
      double sc = kdot_at(tt);
      for (int i = 0; i < n_ode; ++i) dv[i] *= sc;
    };
    f(yy, k1, t0);
    for (int i = 0; i < n_ode; ++i) tmp[i] = yy[i] + 0.5 * h * k1[i];
    f(tmp, k2, t0 + 0.5 * h);
    for (int i = 0; i < n_ode; ++i) tmp[i] = yy[i] + 0.5 * h * k2[i];
    f(tmp, k3, t0 + 0.5 * h);
    for (int i = 0; i < n_ode; ++i) tmp[i] = yy[i] + h * k3[i];
    f(tmp, k4, t0 + h);
    for (int i = 0; i < n_ode; ++i) yy[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  };

  StretchReport rep;
  double t = 0;
  std::size_t gi = 0;
  double T = k.s.back();
  while (true) {
    while (gi < n && k.s[gi] <= t + 1e-12) {
      std::vector<double> want = ref.at(std::min(k.k[gi], ref.final_time()));
      for (int i = 0; i < n_ode; ++i) {
        double diff = std::abs(y[i] - want[i]);
        auto& slot = rep.per_variable[cd.order[i]];
        slot = std::max(slot, diff);
        rep.max_residual = std::max(rep.max_residual, diff);
      }
      ++gi;
    }
    if (t >= T - 1e-12) break;
    double h = std::min(step, T - t);
    if (gi < n) h = std::min(h, k.s[gi] - t + 1e-15);
    if (h < 1e-15) h = step;
    rk4_scaled(y, t, h);
    t += h;
  }
  return rep;
}

SyncRun simulate_synchronized(const RddFormula& a, const State& x0, const State& x0s,
                              double step, double horizon) {
  ExitTerms et = split_equational_exit(a.exit, a.left, a.right);
  State init = x0;
  for (auto& [k, v] : x0s) init[k] = v;
  double g0 = eval_term_numeric(et.left_term, init);
  double gs0 = eval_term_numeric(et.right_term, init);
  if (std::abs(g0 - gs0) > 1e-9 * (1 + std::abs(g0)))
    throw MismatchedEndpoints("exit terms differ at the initial states");
  Dynamics sync = sync_vector_field(a);
  CompiledDyn cd(sync, init);
  TermProg gl = compile_term(et.left_term, cd.idx);
  TermProg gr = compile_term(et.right_term, cd.idx);
  RawTrajectory raw = integrate_raw(cd, cd.pack(init), step, horizon);
  SyncRun run;
  bool pole = false;
  for (std::size_t i = 0; i < raw.times.size(); ++i) {
    double gap = std::abs(gl.eval(raw.states[i], &pole) - gr.eval(raw.states[i], &pole));
    run.max_exit_gap = std::max(run.max_exit_gap, gap);
  }
  run.trajectory = thin(raw, 4096);
  return run;
}

// ---------------------------------------------------------------------------
// Sampling gamma-satisfying states
// ---------------------------------------------------------------------------

namespace {

struct GammaSampler {
  std::vector<std::pair<std::string, Polynomial>> solved;  // var := poly(free vars)
  FormulaPtr gamma;

  explicit GammaSampler(const FormulaPtr& g) : gamma(g) {
    std::vector<Polynomial> eqs;
    for (auto& c : conjuncts(g)) {
      if (c->kind == Formula::Kind::Cmp && c->op == CmpOp::Eq) {
        RationalFunction rf = normalize(mk_sub(c->lhs, c->rhs));
        if (rf.is_polynomial()) eqs.push_back(rf.num());
      }
    }
    // eliminate later-ordered variables with constant linear coefficient
    bool progress = true;
    while (progress && !eqs.empty()) {
      progress = false;
      for (auto it = eqs.begin(); it != eqs.end(); ++it) {
        std::string best;
        Rational coeff;
        for (auto& [m, c] : it->terms()) {
          if (m.size() == 1 && m.begin()->second == 1) {
            const std::string& v = m.begin()->first;
            bool pure = true;  // v occurs only linearly and alone
            for (auto& [m2, c2] : it->terms()) {
              auto f = m2.find(v);
              if (f != m2.end() && (m2.size() > 1 || f->second > 1)) { pure = false; break; }
            }
            if (pure && (best.empty() || v > best)) { best = v; coeff = c; }
          }
        }
        if (best.empty()) continue;
        Polynomial lin;
        lin.add_term(Monomial{{best, 1}}, coeff);
        Polynomial value = (*it - lin).scaled(Rational(-1) / coeff);
        for (auto& [v, p] : solved) p = p.substitute(best, value);
        eqs.erase(it);
        for (auto& e : eqs) e = e.substitute(best, value);
        solved.emplace_back(best, value);
        progress = true;
        break;
      }
    }
  }

  bool sample(const Box& box, std::mt19937_64& rng, State* out) const {
    State s;
    for (auto& [v, iv] : box) {
      bool is_solved = false;
      for (auto& [sv, p] : solved)
        if (sv == v) { is_solved = true; break; }
      if (is_solved) continue;
      std::uniform_real_distribution<double> d(iv.first, iv.second);
      s[v] = d(rng);
    }
    std::map<std::string, double> env(s.begin(), s.end());
    for (auto it = solved.rbegin(); it != solved.rend(); ++it)
      env[it->first] = it->second.evaluate(env);
    for (auto& [v, val] : env) s[v] = val;
    try {
      if (!eval_formula_numeric(gamma, s, 1e-9)) return false;
    } catch (const PoleEncountered&) {
      return false;
    }
    *out = s;
    return true;
  }
};

}  // namespace

std::vector<State> sample_states(const FormulaPtr& gamma, const Box& box, int count,
                                 std::uint64_t seed, int max_rejects_factor) {
  GammaSampler gs(gamma);
  std::vector<State> out;
  long long budget = static_cast<long long>(max_rejects_factor) * std::max(1, count);
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    bool ok = false;
    State s;
    while (budget > 0) {
      --budget;
      if (gs.sample(box, rng, &s)) { ok = true; break; }
    }
    if (!ok) throw GammaUnsatisfiedInBox();
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Falsifier
// ---------------------------------------------------------------------------

namespace {

struct ExitAtom {
  FormulaPtr atom;
  bool is_eq = false;
  bool uses_left = false, uses_right = false;
};

std::vector<ExitAtom> classify_exit(const FormulaPtr& e, const std::set<std::string>& lv,
                                    const std::set<std::string>& rv) {
  std::vector<ExitAtom> out;
  for (auto& c : conjuncts(e)) {
    ExitAtom a;
    a.atom = c;
    a.is_eq = c->kind == Formula::Kind::Cmp && c->op == CmpOp::Eq;
    for (auto& v : free_variables(c)) {
      if (lv.count(v)) a.uses_left = true;
      if (rv.count(v)) a.uses_right = true;
    }
    out.push_back(a);
  }
  return out;
}

struct PairContext {
  const RawTrajectory *left, *right;
  const CompiledDyn *cl, *cr;
  const std::set<std::string>* lv;

  State merged(double tl, double tr) const {
    State s = cr->unpack(right->at(tr));
    State sl = cl->unpack(left->at(tl));
    for (auto& v : *lv) s[v] = sl.at(v);
    return s;
  }
};

double atom_residual(const ExitAtom& a, const PairContext& ctx, double tl, double tr) {
  State s = ctx.merged(tl, tr);
  return eval_term_numeric(a.atom->lhs, s) - eval_term_numeric(a.atom->rhs, s);
}

// bisect one equality along one side; returns false if no sign change brackets
bool refine_one(const ExitAtom& a, const PairContext& ctx, bool adjust_left, double* tl,
                double* tr, double radius) {
  auto res = [&](double x) {
    return adjust_left ? atom_residual(a, ctx, x, *tr) : atom_residual(a, ctx, *tl, x);
  };
  double T = adjust_left ? ctx.left->final_time() : ctx.right->final_time();
  double c = adjust_left ? *tl : *tr;
  double lo = std::max(0.0, c - radius), hi = std::min(T, c + radius);
  double rl = res(lo), rh = res(hi);
  if ((rl < 0) == (rh < 0)) {
    lo = std::max(0.0, c - 4 * radius);
    hi = std::min(T, c + 4 * radius);
    rl = res(lo);
    rh = res(hi);
    if ((rl < 0) == (rh < 0)) return false;
  }
  for (int it = 0; it < 90; ++it) {
    double mid = 0.5 * (lo + hi);
    double rm = res(mid);
    if (std::abs(rm) <= 1e-11) { lo = hi = mid; break; }
    if ((rm < 0) == (rl < 0)) { lo = mid; rl = rm; }
    else hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, T)) break;
  }
  (adjust_left ? *tl : *tr) = 0.5 * (lo + hi);
  return true;
}

}  // namespace

std::string Counterexample::to_text() const {
  std::ostringstream os;
  os << "status: counterexample\n";
  os << "sample: " << sample_index << "\n";
  os.precision(12);
  os << "t_left: " << t_left << "\n";
  os << "t_right: " << t_right << "\n";
  os << "init:";
  for (auto& [k, v] : initial) os << " " << k << "=" << v;
  os << "\n";
  os << "exit:";
  for (auto& [k, v] : exit_states) os << " " << k << "=" << v;
  os << "\n";
  os << "violated: " << print_formula(violated) << "\n";
  return os.str();
}

std::optional<Counterexample> falsify_rdd(const RddFormula& a, const FormulaPtr& gamma,
                                          int samples, const Box& box, double step,
                                          double horizon, std::uint64_t seed) {
  auto inits = sample_states(gamma, box, samples, seed);
  auto lv = a.left.ode_variables();
  auto rv = a.right.ode_variables();
  auto atoms = classify_exit(a.exit, lv, rv);

  for (int si = 0; si < static_cast<int>(inits.size()); ++si) {
    const State& init = inits[si];
    CompiledDyn cl(a.left, init), cr(a.right, init);
    RawTrajectory left, right;
    try {
      left = integrate_raw(cl, cl.pack(init), step, horizon);
      right = integrate_raw(cr, cr.pack(init), step, horizon);
    } catch (const PoleEncountered&) {
      continue;  // this initial pair runs into a pole; it witnesses nothing
    } catch (const DomainViolatedAtStart&) {
      continue;
    }
    PairContext ctx{&left, &right, &cl, &cr, &lv};

    auto knots = [](const RawTrajectory& tr, std::size_t target) {
      std::vector<double> ks;
      std::size_t n = tr.times.size();
      std::size_t stride = std::max<std::size_t>(1, n / target);
      for (std::size_t i = 0; i < n; i += stride) ks.push_back(tr.times[i]);
      if (ks.back() != tr.times.back()) ks.push_back(tr.times.back());
      if (ks.size() < 2) ks.push_back(ks[0]);
      return ks;
    };
    std::vector<double> kl = knots(left, 72), kr = knots(right, 72);

    for (std::size_t i = 0; i + 1 < kl.size(); ++i) {
      for (std::size_t j = 0; j + 1 < kr.size(); ++j) {
        double c_tl[2] = {kl[i], kl[i + 1]};
        double c_tr[2] = {kr[j], kr[j + 1]};
        // candidate cell: every equality atom changes sign over the cell or is
        // small relative to its variation
        bool candidate = true;
        for (auto& at : atoms) {
          if (!at.is_eq) continue;
          double rmin = 1e300, rmax = -1e300;
          for (double x : c_tl)
            for (double y : c_tr) {
              double r = atom_residual(at, ctx, x, y);
              rmin = std::min(rmin, r);
              rmax = std::max(rmax, r);
            }
          if (rmin > 0 || rmax < 0) {
            double span = rmax - rmin;
            if (std::min(std::abs(rmin), std::abs(rmax)) > std::max(span, 1e-12)) {
              candidate = false;
              break;
            }
          }
        }
        if (!candidate) continue;

        double tl = 0.5 * (c_tl[0] + c_tl[1]);
        double tr = 0.5 * (c_tr[0] + c_tr[1]);
        double radius_l = std::max(c_tl[1] - c_tl[0], step);
        double radius_r = std::max(c_tr[1] - c_tr[0], step);
        for (int pass = 0; pass < 6; ++pass) {
          for (auto& at : atoms) {
            if (!at.is_eq) continue;
            if (!at.uses_left && !at.uses_right) continue;
            bool adjust_left = at.uses_left;  // cross atoms adjust the left time
            refine_one(at, ctx, adjust_left, &tl, &tr, adjust_left ? radius_l : radius_r);
          }
        }
        State s = ctx.merged(tl, tr);
        bool e_ok = true;
        for (auto& at : atoms) {
          double r = eval_term_numeric(at.atom->lhs, s) - eval_term_numeric(at.atom->rhs, s);
          double scale = 1 + std::abs(eval_term_numeric(at.atom->rhs, s));
          if (at.is_eq) {
            if (std::abs(r) > 1e-7 * scale) { e_ok = false; break; }
          } else if (!eval_formula_numeric(at.atom, s, 1e-9)) {
            e_ok = false;
            break;
          }
        }
        if (!e_ok) continue;
        if (!eval_formula_numeric(a.post, s, -1e-6)) {
          Counterexample cex;
          cex.sample_index = si;
          cex.t_left = tl;
          cex.t_right = tr;
          cex.initial = init;
          cex.exit_states = s;
          cex.violated = a.post;
          return cex;
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Simulation relation checking
// ---------------------------------------------------------------------------

namespace {

std::string describe_state(const State& s) {
  std::ostringstream os;
  os.precision(9);
  bool first = true;
  for (auto& [k, v] : s) {
    if (!first) os << " ";
    first = false;
    os << k << "=" << v;
  }
  return os.str();
}

// violation measure of a first-order formula (0 when satisfied)
double violation_measure(const FormulaPtr& f, const State& s) {
  switch (f->kind) {
    case Formula::Kind::True: return 0;
    case Formula::Kind::False: return 1e9;
    case Formula::Kind::Cmp: {
      double m = eval_term_numeric(f->lhs, s) - eval_term_numeric(f->rhs, s);
      if (f->op == CmpOp::Eq) return std::abs(m);
      return m >= 0 ? 0.0 : -m;
    }
    case Formula::Kind::Not:
      return eval_formula_numeric(f->a, s, -1e-9) ? 1.0 : 0.0;
    case Formula::Kind::And:
      return std::max(violation_measure(f->a, s), violation_measure(f->b, s));
    default:
      throw UnsupportedFormula("violation measure needs a first-order formula");
  }
}

}  // namespace

SimCheckReport check_simulation_numeric(const FormulaPtr& r, const RddFormula& a,
                                        const Lattice& grid, double step, double horizon,
                                        double tol) {
  if (!is_first_order(r) || !is_quantifier_free(r))
    throw UnsupportedFormula("relation must be first-order and quantifier-free");
  SimCheckReport rep;
  auto lv = a.left.ode_variables();
  auto rv = a.right.ode_variables();

  std::vector<std::string> names;
  std::vector<const std::vector<double>*> axes;
  std::size_t total = 1;
  for (auto& [v, vals] : grid) {
    names.push_back(v);
    axes.push_back(&vals);
    total *= std::max<std::size_t>(1, vals.size());
    if (total > 2000000) throw std::invalid_argument("lattice too large");
  }
  std::vector<State> members;
  for (std::size_t n = 0; n < total; ++n) {
    State s;
    std::size_t rem = n;
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::size_t m = std::max<std::size_t>(1, axes[k]->size());
      s[names[k]] = axes[k]->empty() ? 0.0 : (*axes[k])[rem % m];
      rem /= m;
    }
    if (eval_formula_numeric(r, s, tol)) members.push_back(std::move(s));
  }

  auto atoms = classify_exit(a.exit, lv, rv);
  for (auto& pair : members) {
    // support: r /\ E -> B at the lattice point itself
    if (eval_formula_numeric(a.exit, pair, tol) && !eval_formula_numeric(a.post, pair, -1e-9))
      rep.support_violations.push_back("support fails at " + describe_state(pair));

    CompiledDyn cl(a.left, pair), cr(a.right, pair);
    RawTrajectory left, right;
    try {
      left = integrate_raw(cl, cl.pack(pair), step, horizon);
      right = integrate_raw(cr, cr.pack(pair), step, horizon);
    } catch (const PoleEncountered&) {
      continue;
    } catch (const DomainViolatedAtStart&) {
      continue;
    }
    PairContext ctx{&left, &right, &cl, &cr, &lv};

    // simulation clause: every sampled left successor needs a right partner
    std::size_t stride = std::max<std::size_t>(1, left.times.size() / 24);
    for (std::size_t i = 0; i < left.times.size(); i += stride) {
      State succ = pair;
      State ls = cl.unpack(left.states[i]);
      for (auto& v : lv) succ[v] = ls.at(v);
      double best = 1e300, best_t = 0;
      std::size_t rstride = std::max<std::size_t>(1, right.times.size() / 160);
      auto measure_at = [&](double tt) {
        State cand = succ;
        State rs = cr.unpack(right.at(tt));
        for (auto& v : rv) cand[v] = rs.at(v);
        return violation_measure(r, cand);
      };
      for (std::size_t j = 0; j < right.times.size(); j += rstride) {
        State cand = succ;
        State rs = cr.unpack(right.states[j]);
        for (auto& v : rv) cand[v] = rs.at(v);
        double m = violation_measure(r, cand);
        if (m < best) { best = m; best_t = right.times[j]; }
      }
      double window = std::max(right.final_time() / 10.0, 4 * step);
      double lo = std::max(0.0, best_t - window);
      double hi = std::min(right.final_time(), best_t + window);
      for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (measure_at(m1) < measure_at(m2)) hi = m2;
        else lo = m1;
      }
      best = std::min(best, measure_at(0.5 * (lo + hi)));
      if (best > tol)
        rep.simulation_violations.push_back("no partner for successor at t=" +
                                            std::to_string(left.times[i]) + " from " +
                                            describe_state(pair));
    }

    // essential inclusion: reachable exit pairs must lie in r
    std::vector<double> kl, kr;
    {
      std::size_t ls = std::max<std::size_t>(1, left.times.size() / 48);
      for (std::size_t i2 = 0; i2 < left.times.size(); i2 += ls) kl.push_back(left.times[i2]);
      std::size_t rs = std::max<std::size_t>(1, right.times.size() / 48);
      for (std::size_t j2 = 0; j2 < right.times.size(); j2 += rs) kr.push_back(right.times[j2]);
    }
    for (std::size_t i2 = 0; i2 + 1 < kl.size(); ++i2) {
      for (std::size_t j2 = 0; j2 + 1 < kr.size(); ++j2) {
        double tl = 0.5 * (kl[i2] + kl[i2 + 1]);
        double tr = 0.5 * (kr[j2] + kr[j2 + 1]);
        for (int pass = 0; pass < 5; ++pass)
          for (auto& at : atoms) {
            if (!at.is_eq || (!at.uses_left && !at.uses_right)) continue;
            refine_one(at, ctx, at.uses_left, &tl, &tr,
                       std::max(kl[i2 + 1] - kl[i2], kr[j2 + 1] - kr[j2]));
          }
        State s = ctx.merged(tl, tr);
        bool e_ok = true;
        for (auto& at : atoms) {
          double res = eval_term_numeric(at.atom->lhs, s) - eval_term_numeric(at.atom->rhs, s);
          if (at.is_eq ? std::abs(res) > 1e-7 : !eval_formula_numeric(at.atom, s, 1e-9)) {
            e_ok = false;
            break;
          }
        }
        if (!e_ok) continue;
        if (!eval_formula_numeric(r, s, tol))
          rep.essential_inclusion_violations.push_back(
              "exit pair outside the relation: " + describe_state(s) + " reached from " +
              describe_state(pair));
      }
    }
  }
  auto dedup = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(rep.simulation_violations);
  dedup(rep.support_violations);
  dedup(rep.essential_inclusion_violations);
  return rep;
}

// ---------------------------------------------------------------------------
// Generic sampled program semantics
// ---------------------------------------------------------------------------

void enumerate_successors(const ProgramPtr& p, const State& start, const NumericBudget& opt,
                          const std::function<void(const State&)>& yield) {
  switch (p->kind) {
    case Program::Kind::Test:
      if (eval_formula_numeric(p->test, start, opt.slack)) yield(start);
      return;
    case Program::Kind::Dyn: {
      RawTrajectory raw;
      CompiledDyn cd(p->dyn, start);
      try {
        raw = integrate_raw(cd, cd.pack(start), opt.step, opt.horizon);
      } catch (const PoleEncountered&) {
        return;
      } catch (const DomainViolatedAtStart&) {
        return;
      }
      std::size_t stride = std::max<std::size_t>(1, raw.times.size() / opt.dyn_knots);
      State s = start;
      for (std::size_t i = 0; i < raw.times.size(); i += stride) {
        for (int k = 0; k < cd.n_ode; ++k) s[cd.order[k]] = raw.states[i][k];
        yield(s);
      }
      if ((raw.times.size() - 1) % stride != 0) {
        for (int k = 0; k < cd.n_ode; ++k) s[cd.order[k]] = raw.states.back()[k];
        yield(s);
      }
      return;
    }
    case Program::Kind::Seq:
      enumerate_successors(p->a, start, opt, [&](const State& mid) {
        enumerate_successors(p->b, mid, opt, yield);
      });
      return;
    case Program::Kind::Choice:
      enumerate_successors(p->a, start, opt, yield);
      enumerate_successors(p->b, start, opt, yield);
      return;
  }
}

bool sampled_truth(const FormulaPtr& f, const State& st, const NumericBudget& opt, double slack) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Cmp: {
      double m = eval_term_numeric(f->lhs, st) - eval_term_numeric(f->rhs, st);
      if (f->op == CmpOp::Eq) return slack > 0 && std::abs(m) <= slack;
      return m >= -slack;
    }
    case Formula::Kind::Not: return !sampled_truth(f->a, st, opt, -slack);
    case Formula::Kind::And:
      return sampled_truth(f->a, st, opt, slack) && sampled_truth(f->b, st, opt, slack);
    case Formula::Kind::Box: {
      bool ok = true;
      enumerate_successors(f->prog, st, opt, [&](const State& s) {
        if (ok && !sampled_truth(f->a, s, opt, slack)) ok = false;
      });
      return ok;
    }
    case Formula::Kind::Diamond: {
      bool found = false;
      enumerate_successors(f->prog, st, opt, [&](const State& s) {
        if (!found && sampled_truth(f->a, s, opt, slack)) found = true;
      });
      return found;
    }
    case Formula::Kind::Forall:
      throw UnsupportedFormula("quantified formulas are not numerically evaluated");
  }
  return false;
}

std::string trajectory_to_csv(const Trajectory& tr, const std::vector<std::string>& vars) {
  std::ostringstream os;
  os.precision(12);
  os << "t";
  for (auto& v : vars) os << "," << v;
  os << "\n";
  for (auto& s : tr.samples) {
    os << s.t;
    for (auto& v : vars) os << "," << s.x.at(v);
    os << "\n";
  }
  return os.str();
}

}  // namespace rddl
