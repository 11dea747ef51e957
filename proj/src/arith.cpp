// SPDX-License-Identifier: Apache-2.0
#include "rddl/arith.hpp"

#include <algorithm>
#include <optional>
#include <random>

#include "rddl/algebra.hpp"
#include "rddl/semantics.hpp"

namespace rddl {

namespace {

enum class LitOp { Eq0, Ge0, Gt0 };

struct Lit {
  RationalFunction rf;
  LitOp op;
  bool opaque = false;  // denominator sign unknown; excluded from FM
};

using Branch = std::vector<Lit>;

// --------------------------------------------------------------------------
// DNF of hyps /\ !goal over comparison literals
// --------------------------------------------------------------------------

void check_arithmetic(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Box:
    case Formula::Kind::Diamond:
      throw NonArithmeticInput("modal operator in an arithmetic sequent");
    case Formula::Kind::Forall:
      throw NonArithmeticInput("quantifier in an arithmetic sequent");
    case Formula::Kind::Not: check_arithmetic(f->a); break;
    case Formula::Kind::And:
      check_arithmetic(f->a);
      check_arithmetic(f->b);
      break;
    default: break;
  }
}

std::vector<Branch> cross(const std::vector<Branch>& a, const std::vector<Branch>& b,
                          std::size_t cap) {
  std::vector<Branch> out;
  for (auto& x : a)
    for (auto& y : b) {
      Branch m = x;
      m.insert(m.end(), y.begin(), y.end());
      out.push_back(std::move(m));
      if (out.size() > cap) throw std::length_error("dnf too large");
    }
  return out;
}

std::vector<Branch> dnf_pos(const FormulaPtr& f, std::size_t cap);

std::vector<Branch> dnf_neg(const FormulaPtr& f, std::size_t cap) {
  switch (f->kind) {
    case Formula::Kind::True: return {};
    case Formula::Kind::False: return {Branch{}};
    case Formula::Kind::Cmp: {
      RationalFunction rf = normalize(mk_sub(f->lhs, f->rhs));
      switch (f->op) {
        case CmpOp::Eq: {
          Lit gt{rf, LitOp::Gt0, false};
          Lit lt{-rf, LitOp::Gt0, false};
          return {Branch{gt}, Branch{lt}};
        }
        case CmpOp::Ge: return {Branch{Lit{-rf, LitOp::Gt0, false}}};
        case CmpOp::Gt: return {Branch{Lit{-rf, LitOp::Ge0, false}}};
      }
      return {};
    }
    case Formula::Kind::Not: return dnf_pos(f->a, cap);
    case Formula::Kind::And: {
      auto l = dnf_neg(f->a, cap);
      auto r = dnf_neg(f->b, cap);
      l.insert(l.end(), r.begin(), r.end());
      if (l.size() > cap) throw std::length_error("dnf too large");
      return l;
    }
    default:
      throw NonArithmeticInput("non-arithmetic construct");
  }
}

std::vector<Branch> dnf_pos(const FormulaPtr& f, std::size_t cap) {
  switch (f->kind) {
    case Formula::Kind::True: return {Branch{}};
    case Formula::Kind::False: return {};
    case Formula::Kind::Cmp: {
      RationalFunction rf = normalize(mk_sub(f->lhs, f->rhs));
      LitOp op = f->op == CmpOp::Eq ? LitOp::Eq0 : f->op == CmpOp::Ge ? LitOp::Ge0 : LitOp::Gt0;
      return {Branch{Lit{rf, op, false}}};
    }
    case Formula::Kind::Not: return dnf_neg(f->a, cap);
    case Formula::Kind::And:
      return cross(dnf_pos(f->a, cap), dnf_pos(f->b, cap), cap);
    default:
      throw NonArithmeticInput("non-arithmetic construct");
  }
}

// --------------------------------------------------------------------------
// Fourier-Motzkin over monomial atoms
// --------------------------------------------------------------------------

struct LinCon {
  std::map<Monomial, Rational, GradedLex> coeffs;  // non-constant monomials
  Rational constant;
  bool strict = false;  // ... > 0 vs >= 0

  bool trivial_true() const { return coeffs.empty() && (strict ? constant > 0 : constant >= 0); }
  bool contradiction() const { return coeffs.empty() && (strict ? constant <= 0 : constant < 0); }
};

LinCon lincon_of(const Polynomial& p, bool strict) {
  LinCon c;
  c.strict = strict;
  for (auto& [m, co] : p.terms()) {
    if (m.empty()) c.constant = co;
    else c.coeffs[m] = co;
  }
  return c;
}

// Saturating Fourier-Motzkin refutation: true when the constraints
// ("expr (>|>=) 0" plus equalities) are unsatisfiable over the reals,
// treating monomials as independent atoms.
bool fm_unsat(std::vector<LinCon> ineqs, std::vector<Polynomial> eqs, std::size_t cap = 4000) {
  // Gaussian elimination with the equalities first
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    Polynomial p = eqs[e];
    if (p.is_zero()) continue;
    if (p.is_constant()) return true;  // 0 = c with c nonzero
    Monomial pivot = p.leading_monomial();
    Rational pc = p.leading_coefficient();
    auto coeff_of = [&](const Polynomial& q) {
      for (auto& [m, co] : q.terms())
        if (m == pivot) return co;
      return Rational(0);
    };
    for (std::size_t e2 = e + 1; e2 < eqs.size(); ++e2) {
      Rational qc = coeff_of(eqs[e2]);
      if (qc != 0) eqs[e2] = eqs[e2] - p.scaled(qc / pc);
    }
    for (auto& c : ineqs) {
      auto it = c.coeffs.find(pivot);
      if (it == c.coeffs.end()) continue;
      Rational qc = it->second;
      for (auto& [m, co] : p.terms()) {
        if (m.empty()) c.constant -= qc / pc * co;
        else {
          c.coeffs[m] -= qc / pc * co;
          if (c.coeffs[m] == 0) c.coeffs.erase(m);
        }
      }
    }
  }
  std::vector<Monomial> atoms;
  for (auto& c : ineqs) {
    if (c.contradiction()) return true;
    for (auto& [m, co] : c.coeffs)
      if (std::find(atoms.begin(), atoms.end(), m) == atoms.end()) atoms.push_back(m);
  }
  for (auto& atom : atoms) {
    std::vector<LinCon> next, lower, upper;
    for (auto& c : ineqs) {
      auto it = c.coeffs.find(atom);
      if (it == c.coeffs.end()) { next.push_back(c); continue; }
      if (it->second > 0) lower.push_back(c);
      else upper.push_back(c);
    }
    for (auto& lo : lower) {
      Rational cl = lo.coeffs.at(atom);
      for (auto& up : upper) {
        Rational cu = -up.coeffs.at(atom);
        LinCon nc;
        nc.strict = lo.strict || up.strict;
        nc.constant = cu * lo.constant + cl * up.constant;
        for (auto& [m, co] : lo.coeffs)
          if (!(m == atom)) nc.coeffs[m] += cu * co;
        for (auto& [m, co] : up.coeffs)
          if (!(m == atom)) nc.coeffs[m] += cl * co;
        for (auto it2 = nc.coeffs.begin(); it2 != nc.coeffs.end();) {
          if (it2->second == 0) it2 = nc.coeffs.erase(it2);
          else ++it2;
        }
        if (nc.contradiction()) return true;
        if (!nc.trivial_true()) next.push_back(std::move(nc));
        if (next.size() > cap) return false;  // give up, stay sound
      }
    }
    ineqs = std::move(next);
  }
  for (auto& c : ineqs)
    if (c.contradiction()) return true;
  return false;
}

// --------------------------------------------------------------------------
// Sign engine
// --------------------------------------------------------------------------

struct SignInfo {
  bool pos = false, nonneg = false, neg = false, nonpos = false, nonzero = false;
};

struct BranchSolver {
  std::vector<Lit> lits;
  std::vector<LinCon> base_ineqs;
  std::vector<Polynomial> base_eqs;
  std::map<std::string, SignInfo> var_signs;

  void rebuild_base() {
    base_ineqs.clear();
    base_eqs.clear();
    for (auto& l : lits) {
      if (l.opaque || !l.rf.is_polynomial()) continue;
      const Polynomial& p = l.rf.num();
      if (l.op == LitOp::Eq0) base_eqs.push_back(p);
      else base_ineqs.push_back(lincon_of(p, l.op == LitOp::Gt0));
    }
  }

  bool entails(const Polynomial& p, bool strict) const {
    // unsat of base /\ not(p (>|>=) 0)
    std::vector<LinCon> sys = base_ineqs;
    sys.push_back(lincon_of(-p, !strict));  // not(p>0) = -p>=0 ; not(p>=0) = -p>0
    return fm_unsat(std::move(sys), base_eqs);
  }

  void compute_var_signs() {
    var_signs.clear();
    std::set<std::string> vars;
    for (auto& l : lits) {
      if (l.opaque) continue;
      for (auto& v : l.rf.num().variables()) vars.insert(v);
      for (auto& v : l.rf.den().variables()) vars.insert(v);
    }
    for (auto& v : vars) {
      SignInfo s;
      Polynomial x = Polynomial::variable(v);
      if (entails(x, true)) { s.pos = s.nonneg = s.nonzero = true; }
      else {
        if (entails(x, false)) s.nonneg = true;
        if (entails(-x, true)) { s.neg = s.nonpos = s.nonzero = true; }
        else if (entails(-x, false)) s.nonpos = true;
      }
      var_signs[v] = s;
    }
    // a hypothesis c*x^{2k} > 0 (c > 0) forces x != 0
    for (auto& l : lits) {
      if (l.opaque || l.op != LitOp::Gt0 || !l.rf.is_polynomial()) continue;
      const Polynomial& p = l.rf.num();
      if (p.terms().size() != 1) continue;
      auto& [m, c] = *p.terms().begin();
      if (c <= 0 || m.size() != 1) continue;
      if (m.begin()->second % 2 == 0) var_signs[m.begin()->first].nonzero = true;
    }
    for (auto& [v, s] : var_signs) {
      if (s.nonneg && s.nonzero) s.pos = true;
      if (s.nonpos && s.nonzero) s.neg = true;
    }
  }

  // sign of coeff * monomial from variable signs:
  // +2 (>0), +1 (>=0), -2 (<0), -1 (<=0), 0 (unknown)
  int monomial_sign(const Monomial& m, const Rational& coeff) const {
    if (coeff == 0) return +1;
    int sgn = coeff > 0 ? +2 : -2;
    for (auto& [v, e] : m) {
      auto it = var_signs.find(v);
      SignInfo s = it == var_signs.end() ? SignInfo{} : it->second;
      bool odd = e % 2 == 1;
      if (odd) {
        if (s.pos) continue;
        if (s.neg) { sgn = -sgn; continue; }
        if (s.nonneg) { sgn = sgn > 0 ? +1 : -1; continue; }
        if (s.nonpos) { sgn = sgn > 0 ? -1 : +1; continue; }
        return 0;
      }
      // even exponent: nonnegative, strict only when the variable is nonzero
      if (!s.nonzero) sgn = sgn > 0 ? +1 : -1;
    }
    return sgn;
  }

  // sign via FM entailment only
  int poly_sign_linear(const Polynomial& p) const {
    if (entails(p, true)) return +2;
    if (entails(-p, true)) return -2;
    if (entails(p, false)) return +1;
    if (entails(-p, false)) return -1;
    return 0;
  }

  // definite sign of a polynomial under the branch facts
  int poly_sign(const Polynomial& p, int depth = 0) const {
    if (p.is_zero()) return +1;
    if (p.is_constant()) return p.constant_value() > 0 ? +2 : -2;
    // monomial-sum rule
    bool all_known = true, any_strict = false, all_nonneg = true, all_nonpos = true;
    for (auto& [m, c] : p.terms()) {
      int s = monomial_sign(m, c);
      if (s == 0) { all_known = false; break; }
      if (s > 0) all_nonpos = false;
      if (s < 0) all_nonneg = false;
      if (s == +2 || s == -2) any_strict = true;
    }
    if (all_known) {
      if (all_nonneg) return any_strict ? +2 : +1;
      if (all_nonpos) return any_strict ? -2 : -1;
    }
    // content factoring: p = mono * rest
    if (depth < 2) {
      Monomial content = p.content_monomial();
      if (!content.empty()) {
        int ms = monomial_sign(content, Rational(1));
        Polynomial rest = p.divide_monomial(content);
        int rs = poly_sign_linear(rest);
        if (rs == 0 && depth < 1) rs = poly_sign(rest, depth + 1);
        if (ms != 0 && rs != 0) {
          int mag = (std::abs(ms) == 2 && std::abs(rs) == 2) ? 2 : 1;
          int sgn = (ms > 0) == (rs > 0) ? +1 : -1;
          return sgn * mag;
        }
      }
    }
    return poly_sign_linear(p);
  }
};

// one full symbolic round on a branch; true = refuted
bool refute_branch(Branch branch, int restarts_left) {
  // 1. substitute linear equalities (oriented: the later variable is replaced)
  bool progress = true;
  int guard = 0;
  while (progress && guard++ < 40) {
    progress = false;
    for (std::size_t i = 0; i < branch.size(); ++i) {
      Lit& l = branch[i];
      if (l.op != LitOp::Eq0 || !l.rf.is_polynomial()) continue;
      const Polynomial& p = l.rf.num();
      if (p.is_zero()) {
        branch.erase(branch.begin() + i);
        progress = true;
        break;
      }
      if (p.is_constant()) return true;  // 0 = c
      std::string best;
      Rational coeff;
      for (auto& [m, c] : p.terms()) {
        if (m.size() == 1 && m.begin()->second == 1) {
          const std::string& v = m.begin()->first;
          bool pure = true;
          for (auto& [m2, c2] : p.terms()) {
            auto f = m2.find(v);
            if (f != m2.end() && (m2.size() > 1 || f->second > 1)) { pure = false; break; }
          }
          if (pure && (best.empty() || v > best)) { best = v; coeff = c; }
        }
      }
      if (best.empty()) continue;
      Polynomial lin;
      lin.add_term(Monomial{{best, 1}}, coeff);
      Polynomial value = (p - lin).scaled(Rational(-1) / coeff);
      Branch next;
      bool bad_slice = false;
      for (std::size_t j = 0; j < branch.size(); ++j) {
        if (j == i) continue;
        Lit nl = branch[j];
        Polynomial nn = nl.rf.num().substitute(best, value);
        Polynomial nd = nl.rf.den().substitute(best, value);
        if (nd.is_zero()) { bad_slice = true; break; }
        nl.rf = RationalFunction::make(nn, nd);
        next.push_back(std::move(nl));
      }
      if (bad_slice) return true;  // every literal undefined on this slice
      branch = std::move(next);
      progress = true;
      break;
    }
  }

  BranchSolver solver;
  solver.lits = branch;

  // 2. clear denominators where a sign is derivable (never assumed)
  for (int round = 0; round < 3; ++round) {
    solver.rebuild_base();
    solver.compute_var_signs();
    bool changed = false;
    for (auto& l : solver.lits) {
      if (l.opaque || l.rf.is_polynomial()) continue;
      if (l.op == LitOp::Eq0) {
        l.rf = RationalFunction(l.rf.num());  // p/q = 0 iff p = 0 where defined
        changed = true;
        continue;
      }
      int s = solver.poly_sign(l.rf.den());
      if (s == +2) {
        l.rf = RationalFunction(l.rf.num());
        changed = true;
      } else if (s == -2) {
        l.rf = RationalFunction(-l.rf.num());
        changed = true;
      } else {
        l.opaque = true;
      }
    }
    if (!changed) break;
  }
  solver.rebuild_base();
  solver.compute_var_signs();

  // 3. contradiction search: FM with derived monomial sign facts
  {
    std::vector<LinCon> sys = solver.base_ineqs;
    std::set<Monomial, GradedLex> atoms;
    for (auto& c : sys)
      for (auto& [m, co] : c.coeffs) atoms.insert(m);
    for (auto& e : solver.base_eqs)
      for (auto& [m, co] : e.terms())
        if (!m.empty()) atoms.insert(m);
    for (auto& m : atoms) {
      if (m.size() == 1 && m.begin()->second == 1) continue;
      int s = solver.monomial_sign(m, Rational(1));
      if (s == 0) continue;
      LinCon c;
      c.strict = std::abs(s) == 2;
      c.coeffs[m] = s > 0 ? Rational(1) : Rational(-1);
      sys.push_back(std::move(c));
    }
    if (fm_unsat(sys, solver.base_eqs)) return true;
  }
  for (auto& l : solver.lits) {
    if (l.opaque || !l.rf.is_polynomial()) continue;
    int s = solver.poly_sign(l.rf.num());
    switch (l.op) {
      case LitOp::Eq0:
        if (std::abs(s) == 2) return true;
        break;
      case LitOp::Ge0:
        if (s == -2) return true;
        break;
      case LitOp::Gt0:
        if (s == -2 || s == -1) return true;
        break;
    }
  }

  // 4. implied variable equalities (tight bound pairs) enable substitution
  if (restarts_left > 0) {
    std::set<std::string> vars;
    for (auto& l : solver.lits) {
      if (l.opaque) continue;
      for (auto& v : l.rf.num().variables()) vars.insert(v);
    }
    std::vector<std::string> vlist(vars.begin(), vars.end());
    for (std::size_t i = 0; i < vlist.size(); ++i) {
      for (std::size_t j = i + 1; j < vlist.size(); ++j) {
        Polynomial d = Polynomial::variable(vlist[i]) - Polynomial::variable(vlist[j]);
        if (solver.entails(d, false) && solver.entails(-d, false)) {
          Branch next = solver.lits;
          next.push_back(Lit{RationalFunction(d), LitOp::Eq0, false});
          if (refute_branch(std::move(next), restarts_left - 1)) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

Rational eval_term_exact(const TermPtr& t, const std::map<std::string, Rational>& st) {
  switch (t->kind) {
    case Term::Kind::Variable: {
      auto it = st.find(t->name);
      if (it == st.end()) throw std::invalid_argument("unbound variable " + t->name);
      return it->second;
    }
    case Term::Kind::Constant: return t->value;
    case Term::Kind::Neg: return -eval_term_exact(t->a, st);
    case Term::Kind::Add: return eval_term_exact(t->a, st) + eval_term_exact(t->b, st);
    case Term::Kind::Sub: return eval_term_exact(t->a, st) - eval_term_exact(t->b, st);
    case Term::Kind::Mul: return eval_term_exact(t->a, st) * eval_term_exact(t->b, st);
    case Term::Kind::Div: {
      Rational d = eval_term_exact(t->b, st);
      if (d == 0) throw ZeroDenominator();
      return eval_term_exact(t->a, st) / d;
    }
    case Term::Kind::Pow: {
      Rational b = eval_term_exact(t->a, st);
      Rational r = 1;
      for (unsigned i = 0; i < t->exponent; ++i) r *= b;
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

bool eval_formula_exact(const FormulaPtr& f, const std::map<std::string, Rational>& st) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Cmp: {
      Rational l = eval_term_exact(f->lhs, st), r = eval_term_exact(f->rhs, st);
      switch (f->op) {
        case CmpOp::Eq: return l == r;
        case CmpOp::Ge: return l >= r;
        case CmpOp::Gt: return l > r;
      }
      return false;
    }
    case Formula::Kind::Not: return !eval_formula_exact(f->a, st);
    case Formula::Kind::And:
      return eval_formula_exact(f->a, st) && eval_formula_exact(f->b, st);
    default:
      throw NonArithmeticInput("exact evaluation needs a quantifier-free arithmetic formula");
  }
}

ArithVerdict prove_arith(const std::vector<FormulaPtr>& hypotheses, const FormulaPtr& goal,
                         const ArithOptions& opt) {
  for (auto& h : hypotheses) check_arithmetic(h);
  check_arithmetic(goal);

  FormulaPtr hyp_conj = mk_true();
  for (auto& h : hypotheses) hyp_conj = mk_and(hyp_conj, h);

  ArithVerdict verdict;
  try {
    FormulaPtr refutation_target = mk_and(hyp_conj, mk_not(goal));
    auto branches = dnf_pos(refutation_target, opt.max_branches);
    bool all_refuted = true;
    for (auto& b : branches) {
      if (!refute_branch(b, 3)) {
        all_refuted = false;
        break;
      }
    }
    if (all_refuted) {
      verdict.kind = ArithVerdict::Kind::Proved;
      verdict.trace = "fm+signs over " + std::to_string(branches.size()) + " branches";
      return verdict;
    }
  } catch (const std::length_error&) {
    // dnf blowup; fall through to the refuter
  }

  std::set<std::string> vars = free_variables(hyp_conj);
  for (auto& v : free_variables(goal)) vars.insert(v);

  // exact grid probe first: boundary witnesses (all-zero corners and small
  // integer points) are not reachable by measure
  if (vars.size() <= 8) {
    static const Rational probes[] = {Rational(0), Rational(1), Rational(-1)};
    std::vector<std::string> vlist(vars.begin(), vars.end());
    std::size_t combos = 1;
    for (std::size_t i = 0; i < vlist.size(); ++i) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      std::map<std::string, Rational> w;
      std::size_t rem = c;
      for (auto& v : vlist) {
        w[v] = probes[rem % 3];
        rem /= 3;
      }
      try {
        bool hyps_ok = true;
        for (auto& h : hypotheses)
          if (!eval_formula_exact(h, w)) { hyps_ok = false; break; }
        if (hyps_ok && !eval_formula_exact(goal, w)) {
          verdict.kind = ArithVerdict::Kind::Refuted;
          verdict.witness = std::move(w);
          return verdict;
        }
      } catch (const ZeroDenominator&) {
      }
    }
  }

  // sampling refuter: hyp-satisfying points falsifying the goal, confirmed
  // with exact rationals
  Box box;
  for (auto& v : vars) box[v] = {opt.box_lo, opt.box_hi};
  std::vector<State> points;
  try {
    points = sample_states(hyp_conj, box, opt.refuter_samples, opt.seed, 50);
  } catch (const GammaUnsatisfiedInBox&) {
    verdict.kind = ArithVerdict::Kind::Unknown;
    return verdict;
  }
  for (auto& p : points) {
    bool violated;
    try {
      violated = !eval_formula_numeric(goal, p, -1e-9);
    } catch (const PoleEncountered&) {
      continue;
    }
    if (!violated) continue;
    std::map<std::string, Rational> w;
    for (auto& [k, v] : p) w[k] = rational_from_double(v);
    try {
      bool hyps_exact = true;
      for (auto& h : hypotheses)
        if (!eval_formula_exact(h, w)) { hyps_exact = false; break; }
      if (hyps_exact && !eval_formula_exact(goal, w)) {
        verdict.kind = ArithVerdict::Kind::Refuted;
        verdict.witness = std::move(w);
        return verdict;
      }
    } catch (const ZeroDenominator&) {
      continue;
    }
  }
  verdict.kind = ArithVerdict::Kind::Unknown;
  return verdict;
}

ObligationLedger::ObligationId ObligationLedger::register_obligation(
    const std::string& normalized_sequent) {
  auto it = index_.find(normalized_sequent);
  if (it != index_.end()) return it->second;
  ObligationId id = static_cast<ObligationId>(entries_.size());
  entries_.push_back(normalized_sequent);
  index_[normalized_sequent] = id;
  return id;
}

}  // namespace rddl
