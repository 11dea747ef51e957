// SPDX-License-Identifier: Apache-2.0
#include "rddl/kernel.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace rddl {

namespace {

// ---------------------------------------------------------------------------
// Program shape helpers
// ---------------------------------------------------------------------------

void flatten_seq_rec(const ProgramPtr& p, std::vector<ProgramPtr>& out) {
  if (p->kind == Program::Kind::Seq) {
    flatten_seq_rec(p->a, out);
    flatten_seq_rec(p->b, out);
  } else {
    out.push_back(p);
  }
}

std::vector<ProgramPtr> flatten_seq(const ProgramPtr& p) {
  std::vector<ProgramPtr> out;
  flatten_seq_rec(p, out);
  return out;
}

ProgramPtr rebuild_seq(const std::vector<ProgramPtr>& comps) {
  if (comps.empty()) throw std::logic_error("rebuild_seq: empty");
  ProgramPtr p = comps[0];
  for (std::size_t i = 1; i < comps.size(); ++i) p = mk_seq(p, comps[i]);
  return p;
}

struct BoxShape {
  std::vector<ProgramPtr> comps;
  FormulaPtr post;
  bool box = true;  // false: diamond
};

BoxShape decompose_modal(const FormulaPtr& goal, const char* rule) {
  if (goal->kind != Formula::Kind::Box && goal->kind != Formula::Kind::Diamond)
    throw RuleMismatch(std::string(rule) + ": goal is not a modal formula: " +
                       print_formula(goal));
  BoxShape b;
  b.comps = flatten_seq(goal->prog);
  b.post = goal->a;
  b.box = goal->kind == Formula::Kind::Box;
  return b;
}

BoxShape decompose_box(const FormulaPtr& goal, const char* rule) {
  BoxShape b = decompose_modal(goal, rule);
  if (!b.box) throw RuleMismatch(std::string(rule) + ": goal must be a box formula");
  return b;
}

const Dynamics& head_dynamics(const BoxShape& b, const char* rule) {
  if (b.comps.empty() || b.comps[0]->kind != Program::Kind::Dyn)
    throw RuleMismatch(std::string(rule) + ": program does not start with differential dynamics");
  return b.comps[0]->dyn;
}

const Dynamics& single_dynamics(const BoxShape& b, const char* rule) {
  if (b.comps.size() != 1 || b.comps[0]->kind != Program::Kind::Dyn)
    throw RuleMismatch(std::string(rule) + ": goal must be a box over a single dynamics");
  return b.comps[0]->dyn;
}

// [DynL; DynR; ?E] with disjoint differential variables
struct RddShape {
  Dynamics left, right;
  FormulaPtr exit;
  FormulaPtr post;
};

RddShape decompose_rdd(const FormulaPtr& goal, const char* rule) {
  BoxShape b = decompose_box(goal, rule);
  if (b.comps.size() != 3 || b.comps[0]->kind != Program::Kind::Dyn ||
      b.comps[1]->kind != Program::Kind::Dyn || b.comps[2]->kind != Program::Kind::Test)
    throw RuleMismatch(std::string(rule) +
                       ": goal is not of the shape [dyn; dyn; ?exit] post");
  RddShape r;
  r.left = b.comps[0]->dyn;
  r.right = b.comps[1]->dyn;
  r.exit = b.comps[2]->test;
  r.post = b.post;
  auto lv = r.left.ode_variables();
  for (auto& v : r.right.ode_variables())
    if (lv.count(v))
      throw RuleMismatch(std::string(rule) + ": the two dynamics share variable '" + v + "'");
  return r;
}

// normalized comparison: goal `l ~ r` as `g ~ 0` with ~ in {=, >=, >}
struct NormCmp {
  TermPtr g;
  CmpOp op;
  FormulaPtr as_formula() const { return mk_cmp(g, op, mk_const(Rational(0))); }
};

bool term_is_zero_literal(const TermPtr& t) {
  return t->kind == Term::Kind::Constant && t->value == 0;
}

NormCmp normalize_goal_cmp(const FormulaPtr& f, const char* rule) {
  if (f->kind != Formula::Kind::Cmp)
    throw RuleMismatch(std::string(rule) + ": postcondition is not a comparison: " +
                       print_formula(f));
  NormCmp n;
  n.op = f->op;
  n.g = term_is_zero_literal(f->rhs) ? f->lhs : mk_sub(f->lhs, f->rhs);
  return n;
}

FormulaPtr ge0(const RationalFunction& rf) {
  return mk_cmp(to_term(rf), CmpOp::Ge, mk_const(Rational(0)));
}
FormulaPtr gt0(const RationalFunction& rf) {
  return mk_cmp(to_term(rf), CmpOp::Gt, mk_const(Rational(0)));
}

std::vector<FormulaPtr> ctx_with(const std::vector<FormulaPtr>& ctx, const FormulaPtr& extra) {
  std::vector<FormulaPtr> out = ctx;
  if (extra->kind != Formula::Kind::True) out.push_back(extra);
  return out;
}

enum class TermSide { Left, Right, Param, Mixed };

TermSide side_of_term(const TermPtr& t, const std::set<std::string>& lv,
                      const std::set<std::string>& rv) {
  bool l = false, r = false;
  for (auto& v : free_variables(t)) {
    if (lv.count(v)) l = true;
    if (rv.count(v)) r = true;
  }
  if (l && r) return TermSide::Mixed;
  if (l) return TermSide::Left;
  if (r) return TermSide::Right;
  return TermSide::Param;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sequents
// ---------------------------------------------------------------------------

Sequent mk_sequent(std::vector<FormulaPtr> context, FormulaPtr goal) {
  for (auto& c : context)
    if (!is_first_order(c))
      throw std::invalid_argument("sequent context must be modality-free: " + print_formula(c));
  return Sequent{std::move(context), std::move(goal)};
}

bool sequent_equal(const Sequent& a, const Sequent& b) {
  if (a.context.size() != b.context.size()) return false;
  for (std::size_t i = 0; i < a.context.size(); ++i)
    if (!formula_equal(a.context[i], b.context[i])) return false;
  return formula_equal(a.goal, b.goal);
}

std::string print_sequent(const Sequent& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.context.size(); ++i) {
    if (i) os << ", ";
    os << print_formula(s.context[i]);
  }
  if (!s.context.empty()) os << " ";
  os << "|- " << print_formula(s.goal);
  return os.str();
}

std::vector<FormulaPtr> flattened_context(const Sequent& s) {
  std::vector<FormulaPtr> out;
  for (auto& c : s.context) {
    auto cs = conjuncts(c);
    out.insert(out.end(), cs.begin(), cs.end());
  }
  return out;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::DI: return "DI";
    case Rule::DC: return "DC";
    case Rule::DW: return "DW";
    case Rule::DII: return "DII";
    case Rule::SIM: return "SIM";
    case Rule::TS: return "TS";
    case Rule::MCS: return "MCS";
    case Rule::RDC: return "RDC";
    case Rule::ECP: return "ECP";
    case Rule::SCC_BOX: return "SCC-BOX";
    case Rule::SCC_DIA: return "SCC-DIA";
    case Rule::MID_BOX: return "MID-BOX";
    case Rule::MID_DIA: return "MID-DIA";
    case Rule::DCC: return "DCC";
    case Rule::DBX_GT: return "DBX-GT";
    case Rule::SPLIT: return "SPLIT";
    case Rule::COMPOSE: return "COMPOSE";
    case Rule::TEST: return "TEST";
    case Rule::WEAKEN: return "WEAKEN";
    case Rule::ARITH: return "ARITH";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// DI / DC / DW / DII
// ---------------------------------------------------------------------------

std::vector<Sequent> apply_DI(const Sequent& s, SideConditions* sc) {
  BoxShape b = decompose_box(s.goal, "DI");
  const Dynamics& d = single_dynamics(b, "DI");
  NormCmp n = normalize_goal_cmp(b.post, "DI");
  // variant table (=,=), (>,>=), (>=,>=)
  CmpOp lie_op = n.op == CmpOp::Eq ? CmpOp::Eq : CmpOp::Ge;
  VectorField f = VectorField::from_dynamics(d, sc);
  RationalFunction g = normalize(n.g, sc);
  RationalFunction lie = lie_derivative(f, g);
  Sequent p1{ctx_with(s.context, d.constraint), n.as_formula()};
  Sequent p2{s.context, mk_box(mk_dyn(d), mk_cmp(to_term(lie), lie_op, mk_const(Rational(0))))};
  return {p1, p2};
}

std::vector<Sequent> apply_DC(const Sequent& s, const FormulaPtr& cut) {
  BoxShape b = decompose_box(s.goal, "DC");
  const Dynamics& d = head_dynamics(b, "DC");
  if (!is_first_order(cut))
    throw RuleMismatch("DC: the cut formula must be first-order");
  Sequent p1{s.context, mk_box(mk_dyn(d), cut)};
  Dynamics strengthened = d;
  strengthened.constraint = mk_and(d.constraint, cut);
  std::vector<ProgramPtr> comps = b.comps;
  comps[0] = mk_dyn(strengthened);
  Sequent p2{s.context, mk_box(rebuild_seq(comps), b.post)};
  return {p1, p2};
}

std::vector<Sequent> apply_DW(const Sequent& s) {
  BoxShape b = decompose_box(s.goal, "DW");
  const Dynamics& d = head_dynamics(b, "DW");
  std::vector<FormulaPtr> ctx;
  if (d.constraint->kind != Formula::Kind::True) ctx.push_back(d.constraint);
  FormulaPtr goal = b.comps.size() == 1
                        ? b.post
                        : mk_box(rebuild_seq({b.comps.begin() + 1, b.comps.end()}), b.post);
  return {Sequent{ctx, goal}};
}

std::vector<Sequent> apply_DII(const Sequent& s, unsigned n, SideConditions* sc) {
  if (n < 1) throw RuleMismatch("DII: order must be >= 1");
  BoxShape b = decompose_box(s.goal, "DII");
  const Dynamics& d = single_dynamics(b, "DII");
  NormCmp nc = normalize_goal_cmp(b.post, "DII");
  if (nc.op != CmpOp::Ge)
    throw RuleMismatch("DII: goal must be a nonstrict inequality g >= 0, got " +
                       print_formula(b.post));
  VectorField f = VectorField::from_dynamics(d, sc);
  RationalFunction g = normalize(nc.g, sc);
  FormulaPtr dn = dii_disjunction(f, g, n);
  Dynamics inductive = d;
  inductive.constraint = mk_and(d.constraint, nc.as_formula());
  Sequent p1{ctx_with(s.context, d.constraint), nc.as_formula()};
  Sequent p2{s.context, mk_box(mk_dyn(inductive), dn)};
  return {p1, p2};
}

// ---------------------------------------------------------------------------
// SIM / TS / MCS
// ---------------------------------------------------------------------------

std::vector<Sequent> apply_SIM(const Sequent& s, const FormulaPtr& r) {
  RddShape a = decompose_rdd(s.goal, "SIM");
  if (!is_first_order(r) || !is_quantifier_free(r))
    throw RuleMismatch("SIM: the relation must be first-order and quantifier-free");
  // R |- [dl]<dr> R
  Sequent p1{{r}, mk_box(mk_dyn(a.left), mk_diamond(mk_dyn(a.right), r))};
  // R, E |- B
  Sequent p2{{r, a.exit}, a.post};
  // R |- [dl; dr; ?E] R   (essential inclusion, the paper's own encoding)
  Sequent p3{{r}, mk_box(mk_seq(mk_seq(mk_dyn(a.left), mk_dyn(a.right)), mk_test(a.exit)), r)};
  // Gamma |- [?Q /\ Q#] R
  Sequent p4{s.context,
             mk_box(mk_test(mk_and(a.left.constraint, a.right.constraint)), r)};
  return {p1, p2, p3, p4};
}

namespace {

std::vector<Sequent> ts_premises(const std::vector<FormulaPtr>& ctx, const RddFormula& a,
                                 const FormulaPtr& rewritten_goal, SideConditions* sc) {
  ExitTerms et = split_equational_exit(a.exit, a.left, a.right, sc);
  Sequent p1{ctx, mk_box(mk_test(mk_and(a.left.constraint, a.right.constraint)), a.exit)};
  FormulaPtr ratio_pos = mk_cmp(mk_div(to_term(et.left_lie), to_term(et.right_lie)), CmpOp::Gt,
                                mk_const(Rational(0)));
  Sequent p2{ctx, mk_box(mk_seq(mk_dyn(a.left), mk_dyn(a.right)), ratio_pos)};
  Sequent p3{ctx, rewritten_goal};
  return {p1, p2, p3};
}

}  // namespace

std::vector<Sequent> apply_TS(const Sequent& s, bool forward,
                              const std::optional<RddFormula>& target, SideConditions* sc) {
  if (forward) {
    RddShape shape = decompose_rdd(s.goal, "TS");
    RddFormula a(shape.left, shape.right, shape.exit, shape.post);
    Dynamics sync = sync_vector_field(a, sc);
    FormulaPtr rewritten = mk_box(mk_dyn(sync), a.post);
    return ts_premises(s.context, a, rewritten, sc);
  }
  // backward: goal is [sync] B; the source RDD is supplied as a parameter
  if (!target) throw RuleMismatch("TS: backward direction needs the source rdd formula");
  BoxShape b = decompose_box(s.goal, "TS");
  const Dynamics& goal_dyn = single_dynamics(b, "TS");
  RddFormula a(target->left, target->right, target->exit, b.post);
  Dynamics sync = sync_vector_field(a, sc);
  if (!dynamics_equal(sync, goal_dyn)) {
    // representation differences are fine; compare the normalized fields
    if (sync.odes.size() != goal_dyn.odes.size())
      throw RuleMismatch("TS: goal dynamics do not match the synchronized dynamics");
    for (std::size_t i = 0; i < sync.odes.size(); ++i) {
      if (sync.odes[i].first != goal_dyn.odes[i].first ||
          normalize(sync.odes[i].second) != normalize(goal_dyn.odes[i].second))
        throw RuleMismatch("TS: goal dynamics do not match the synchronized dynamics");
    }
    if (!formula_equal(sync.constraint, goal_dyn.constraint))
      throw RuleMismatch("TS: goal constraint does not match Q /\\ Q#");
  }
  FormulaPtr rewritten = desugar_rdd(a);
  return ts_premises(s.context, a, rewritten, sc);
}

std::vector<Sequent> apply_MCS(const Sequent& s, std::array<bool, 4> flags, SideConditions* sc,
                               bool* experimental) {
  RddShape shape = decompose_rdd(s.goal, "MCS");
  auto lv = shape.left.ode_variables();
  auto rv = shape.right.ode_variables();
  // exit g = g#
  if (shape.exit->kind != Formula::Kind::Cmp || shape.exit->op != CmpOp::Eq)
    throw RuleMismatch("MCS: exit condition must be a single equality");
  TermPtr g_l = shape.exit->lhs, g_r = shape.exit->rhs;
  TermSide sl = side_of_term(g_l, lv, rv), sr = side_of_term(g_r, lv, rv);
  if (sl == TermSide::Right && sr != TermSide::Right) std::swap(g_l, g_r);
  else if (sl == TermSide::Mixed || sr == TermSide::Mixed)
    throw RuleMismatch("MCS: exit equality mixes the two variable sets on one side");
  // post h <= h#, stored canonically as h# >= h
  if (shape.post->kind != Formula::Kind::Cmp || shape.post->op != CmpOp::Ge)
    throw RuleMismatch("MCS: postcondition must have the shape h <= h#");
  TermPtr h_sharp = shape.post->lhs, h = shape.post->rhs;
  if (side_of_term(h_sharp, lv, rv) == TermSide::Left ||
      side_of_term(h, lv, rv) == TermSide::Right) {
    throw RuleMismatch("MCS: postcondition must compare a left term against a right term");
  }
  bool is_experimental = !(flags[0] && flags[1] && flags[2] && flags[3]);
  if (experimental) *experimental = is_experimental;

  VectorField fl = VectorField::from_dynamics(shape.left, sc);
  VectorField fr = VectorField::from_dynamics(shape.right, sc);
  RationalFunction lie_g = lie_derivative(fl, normalize(g_l, sc));
  RationalFunction lie_h = lie_derivative(fl, normalize(h, sc));
  RationalFunction lie_hs = lie_derivative(fr, normalize(h_sharp, sc));

  // swapped rdd: exit h = h#, post g >= g# (directions follow the flags)
  FormulaPtr sw_exit = mk_cmp(h, CmpOp::Eq, h_sharp);
  FormulaPtr sw_post = flags[1] ? mk_cmp(g_l, CmpOp::Ge, g_r) : mk_cmp(g_r, CmpOp::Ge, g_l);
  RddFormula swapped(shape.left, shape.right, sw_exit, sw_post);
  Sequent p1{s.context, desugar_rdd(swapped)};
  Sequent p2{s.context, mk_box(mk_test(mk_and(shape.left.constraint, shape.right.constraint)),
                               mk_cmp(h_sharp, CmpOp::Ge, h))};
  auto lie_cmp = [](const RationalFunction& rf, bool increasing, bool strict) {
    TermPtr t = to_term(rf);
    TermPtr zero = mk_const(Rational(0));
    CmpOp op = strict ? CmpOp::Gt : CmpOp::Ge;
    return increasing ? mk_cmp(t, op, zero) : mk_cmp(zero, op, t);
  };
  Sequent p3{s.context, mk_box(mk_dyn(shape.left), lie_cmp(lie_g, flags[0], true))};
  Sequent p4{s.context, mk_box(mk_dyn(shape.left), lie_cmp(lie_h, flags[2], false))};
  Sequent p5{s.context, mk_box(mk_dyn(shape.right), lie_cmp(lie_hs, flags[3], false))};
  return {p1, p2, p3, p4, p5};
}

// ---------------------------------------------------------------------------
// RDC / ECP
// ---------------------------------------------------------------------------

std::vector<Sequent> apply_RDC(const Sequent& s, const FormulaPtr& cut_exit) {
  BoxShape b = decompose_box(s.goal, "RDC");
  if (b.comps.size() != 3 || b.comps[0]->kind != Program::Kind::Dyn ||
      b.comps[1]->kind != Program::Kind::Dyn || b.comps[2]->kind != Program::Kind::Test)
    throw RuleMismatch("RDC: goal is not of the shape [dyn; dyn; ?P] phi");
  const Dynamics& dl = b.comps[0]->dyn;
  const Dynamics& dr = b.comps[1]->dyn;
  if (cut_exit->kind != Formula::Kind::Cmp || cut_exit->op != CmpOp::Eq)
    throw RuleMismatch("RDC: the cut must be a single equality g = g#");
  auto lv = dl.ode_variables();
  auto rv = dr.ode_variables();
  TermSide sl = side_of_term(cut_exit->lhs, lv, rv);
  TermSide sr = side_of_term(cut_exit->rhs, lv, rv);
  if (sl == TermSide::Mixed || sr == TermSide::Mixed || sl == sr)
    throw SideConditionFailed("RDC: cut must relate the two variable sets across sides");
  Sequent p1{s.context,
             mk_box(rebuild_seq({b.comps[0], b.comps[1], mk_test(cut_exit), b.comps[2]}),
                    b.post)};
  Sequent p2{s.context,
             mk_box(rebuild_seq({b.comps[0], b.comps[1], b.comps[2]}), cut_exit)};
  return {p1, p2};
}

std::vector<Sequent> apply_ECP(const Sequent& s, SideConditions* sc) {
  BoxShape b = decompose_box(s.goal, "ECP");
  if (b.comps.size() != 5 || b.comps[0]->kind != Program::Kind::Dyn ||
      b.comps[1]->kind != Program::Kind::Dyn || b.comps[2]->kind != Program::Kind::Test ||
      b.comps[3]->kind != Program::Kind::Dyn || b.comps[4]->kind != Program::Kind::Test)
    throw RuleMismatch("ECP: goal is not of the shape [d0; d1; ?P; d2; ?(g = g#)] phi");
  const Dynamics& d0 = b.comps[0]->dyn;
  const Dynamics& d1 = b.comps[1]->dyn;
  const Dynamics& d2 = b.comps[3]->dyn;
  FormulaPtr p = b.comps[2]->test;
  FormulaPtr e = b.comps[4]->test;
  auto s0 = d0.ode_variables();
  auto s1 = d1.ode_variables();
  auto s2 = d2.ode_variables();
  if (s1 != s2)
    throw RuleMismatch("ECP: the two phase dynamics must bind the same variables");
  for (auto& v : s0)
    if (s1.count(v)) throw RuleMismatch("ECP: variable '" + v + "' is bound on both sides");
  for (auto& v : free_variables(p))
    if (s0.count(v))
      throw SideConditionFailed("ECP: the phase test mentions the other side's variable '" +
                                v + "'");
  if (e->kind != Formula::Kind::Cmp || e->op != CmpOp::Eq)
    throw RuleMismatch("ECP: the exit condition must be a single equality");
  // exit term on the two-phase side
  auto pick_side = [&](const TermPtr& t) { return side_of_term(t, s1, s0); };
  TermSide tl = pick_side(e->lhs), tr = pick_side(e->rhs);
  TermPtr g_two;
  if (tl == TermSide::Left && tr != TermSide::Left) g_two = e->lhs;
  else if (tr == TermSide::Left && tl != TermSide::Left) g_two = e->rhs;
  else throw RuleMismatch("ECP: exit equality does not single out the two-phase side");

  VectorField f1 = VectorField::from_dynamics(d1, sc);
  VectorField f2 = VectorField::from_dynamics(d2, sc);
  RationalFunction g = normalize(g_two, sc);
  Sequent p1{s.context,
             mk_box(rebuild_seq({b.comps[0], b.comps[1], mk_test(e), mk_test(p), b.comps[0],
                                 b.comps[3], mk_test(e)}),
                    b.post)};
  Sequent p2{s.context, mk_box(mk_dyn(d1), ge0(lie_derivative(f1, g)))};
  Sequent p3{s.context, mk_box(mk_seq(mk_dyn(d1), mk_dyn(d2)), ge0(lie_derivative(f2, g)))};
  return {p1, p2, p3};
}

// ---------------------------------------------------------------------------
// SCC / MID / DCC / DBX
// ---------------------------------------------------------------------------

namespace {

std::vector<Sequent> swap_adjacent(const Sequent& s, bool box_modality, int pos,
                                   bool require_identical_dyn, SideConditions* sc,
                                   const char* rule) {
  BoxShape b = decompose_modal(s.goal, rule);
  if (b.box != box_modality)
    throw RuleMismatch(std::string(rule) + ": goal modality does not match the rule variant");
  if (pos < 1 || static_cast<std::size_t>(pos) >= b.comps.size())
    throw RuleMismatch(std::string(rule) + ": position out of range");
  ProgramPtr a = b.comps[pos - 1], c = b.comps[pos];
  if (require_identical_dyn) {
    if (a->kind != Program::Kind::Dyn || c->kind != Program::Kind::Dyn)
      throw RuleMismatch(std::string(rule) + ": both components must be differential dynamics");
    const Dynamics &da = a->dyn, &dc = c->dyn;
    if (da.odes.size() != dc.odes.size())
      throw RuleMismatch(std::string(rule) + ": dynamics differ");
    for (std::size_t i = 0; i < da.odes.size(); ++i) {
      if (da.odes[i].first != dc.odes[i].first ||
          normalize(da.odes[i].second, sc) != normalize(dc.odes[i].second, sc))
        throw RuleMismatch(std::string(rule) + ": dynamics differ after normalization");
    }
    if (!formula_equal(da.constraint, dc.constraint))
      throw RuleMismatch(std::string(rule) + ": evolution domain constraints differ");
    std::vector<ProgramPtr> comps;
    for (std::size_t i = 0; i < b.comps.size(); ++i)
      if (i != static_cast<std::size_t>(pos)) comps.push_back(b.comps[i]);
    FormulaPtr g = box_modality ? mk_box(rebuild_seq(comps), b.post)
                                : mk_diamond(rebuild_seq(comps), b.post);
    return {Sequent{s.context, g}};
  }
  // commutation: neither program may write a variable the other reads
  auto wa = written_variables(a);
  auto vc = free_variables(c);
  auto wc = written_variables(c);
  auto va = free_variables(a);
  for (auto& v : wa)
    if (vc.count(v))
      throw SideConditionFailed(std::string(rule) + ": '" + v + "' is written by one component and read by the other");
  for (auto& v : wc)
    if (va.count(v))
      throw SideConditionFailed(std::string(rule) + ": '" + v + "' is written by one component and read by the other");
  std::vector<ProgramPtr> comps = b.comps;
  std::swap(comps[pos - 1], comps[pos]);
  FormulaPtr g = box_modality ? mk_box(rebuild_seq(comps), b.post)
                              : mk_diamond(rebuild_seq(comps), b.post);
  return {Sequent{s.context, g}};
}

}  // namespace

std::vector<Sequent> apply_SCC(const Sequent& s, bool box_modality, int pos) {
  return swap_adjacent(s, box_modality, pos, false, nullptr, "SCC");
}

std::vector<Sequent> apply_MID(const Sequent& s, bool box_modality, int pos,
                               SideConditions* sc) {
  return swap_adjacent(s, box_modality, pos, true, sc, "MID");
}

std::vector<Sequent> apply_DCC(const Sequent& s, const FormulaPtr& cond) {
  BoxShape b = decompose_box(s.goal, "DCC");
  const Dynamics& d = single_dynamics(b, "DCC");
  // match post as cond -> phi
  FormulaPtr phi;
  if (cond->kind == Formula::Kind::True) {
    phi = b.post;
  } else if (b.post->kind == Formula::Kind::Not &&
             b.post->a->kind == Formula::Kind::And) {
    FormulaPtr x = b.post->a->a, y = b.post->a->b;
    if (formula_equal(x, cond)) phi = mk_not(y);
    else if (formula_equal(y, mk_not(cond))) phi = mk_not(x);
    else if (formula_equal(y, cond)) phi = mk_not(x);
    else
      throw RuleMismatch("DCC: postcondition is not an implication from the given condition");
  } else {
    throw RuleMismatch("DCC: postcondition is not an implication under the box");
  }
  Dynamics strengthened = d;
  strengthened.constraint = mk_and(d.constraint, cond);
  Sequent p1{s.context, mk_box(mk_dyn(strengthened), phi)};
  std::vector<FormulaPtr> ctx2;
  if (d.constraint->kind != Formula::Kind::True) ctx2.push_back(d.constraint);
  FormulaPtr ncond = mk_not(cond);
  if (ncond->kind != Formula::Kind::True) ctx2.push_back(ncond);
  Sequent p2{ctx2, mk_box(mk_dyn(d), ncond)};
  return {p1, p2};
}

std::vector<Sequent> apply_DBX_GT(const Sequent& s, const TermPtr& cofactor,
                                  SideConditions* sc) {
  BoxShape b = decompose_box(s.goal, "DBX-GT");
  const Dynamics& d = single_dynamics(b, "DBX-GT");
  NormCmp n = normalize_goal_cmp(b.post, "DBX-GT");
  if (n.op != CmpOp::Gt)
    throw RuleMismatch("DBX-GT: goal must be a strict inequality h > 0");
  // context must contain h > 0 (weakening of extra hypotheses is built in)
  FormulaPtr want = n.as_formula();
  bool found = false;
  for (auto& c : flattened_context(s)) {
    if (formula_equal(c, want) || formula_equal(c, b.post)) { found = true; break; }
  }
  if (!found)
    throw RuleMismatch("DBX-GT: the context does not contain the invariant " +
                       print_formula(want));
  RationalFunction cof = normalize(cofactor, sc);
  if (!cof.is_polynomial())
    throw NonPolynomialCofactor("DBX-GT: cofactor " + print_term(cofactor) +
                                " is not a polynomial");
  VectorField f = VectorField::from_dynamics(d, sc);
  RationalFunction lie = lie_derivative(f, normalize(n.g, sc));
  std::vector<FormulaPtr> ctx;
  if (d.constraint->kind != Formula::Kind::True) ctx.push_back(d.constraint);
  Sequent p{ctx, mk_cmp(to_term(lie), CmpOp::Ge, mk_mul(cofactor, n.g))};
  return {p};
}

// ---------------------------------------------------------------------------
// Structural rules
// ---------------------------------------------------------------------------

std::vector<Sequent> apply_structural(const Sequent& s, StructuralOp which,
                                      const RuleParams& params) {
  switch (which) {
    case StructuralOp::ChoiceSplit: {
      BoxShape b = decompose_box(s.goal, "SPLIT");
      if (b.comps.empty() || b.comps[0]->kind != Program::Kind::Choice)
        throw RuleMismatch("SPLIT: program does not start with a choice");
      std::vector<ProgramPtr> rest(b.comps.begin() + 1, b.comps.end());
      auto with_head = [&](const ProgramPtr& h) {
        std::vector<ProgramPtr> comps = flatten_seq(h);
        comps.insert(comps.end(), rest.begin(), rest.end());
        return mk_box(rebuild_seq(comps), b.post);
      };
      return {Sequent{s.context, with_head(b.comps[0]->a)},
              Sequent{s.context, with_head(b.comps[0]->b)}};
    }
    case StructuralOp::Compose: {
      BoxShape b = decompose_box(s.goal, "COMPOSE");
      auto pos_it = params.ints.find("pos");
      if (pos_it != params.ints.end()) {
        long k = pos_it->second;
        if (k < 1 || static_cast<std::size_t>(k) >= b.comps.size())
          throw RuleMismatch("COMPOSE: split position out of range");
        FormulaPtr inner = mk_box(
            rebuild_seq({b.comps.begin() + k, b.comps.end()}), b.post);
        FormulaPtr outer = mk_box(rebuild_seq({b.comps.begin(), b.comps.begin() + k}), inner);
        return {Sequent{s.context, outer}};
      }
      // merge direction: [(alpha)] [beta] phi  ==>  [alpha; beta] phi
      if (b.post->kind != Formula::Kind::Box)
        throw RuleMismatch("COMPOSE: postcondition is not a box formula to merge");
      std::vector<ProgramPtr> comps = b.comps;
      auto inner = flatten_seq(b.post->prog);
      comps.insert(comps.end(), inner.begin(), inner.end());
      return {Sequent{s.context, mk_box(rebuild_seq(comps), b.post->a)}};
    }
    case StructuralOp::TestIntro: {
      BoxShape b = decompose_box(s.goal, "TEST");
      if (b.comps.empty() || b.comps[0]->kind != Program::Kind::Test)
        throw RuleMismatch("TEST: program does not start with a test");
      FormulaPtr p = b.comps[0]->test;
      if (!is_first_order(p))
        throw RuleMismatch("TEST: the test formula must be first-order");
      FormulaPtr goal =
          b.comps.size() == 1
              ? b.post
              : mk_box(rebuild_seq({b.comps.begin() + 1, b.comps.end()}), b.post);
      return {Sequent{ctx_with(s.context, p), goal}};
    }
    case StructuralOp::MonotoneWeaken: {
      auto cit = params.formulas.find("ctx");
      auto pit = params.formulas.find("post");
      if (cit == params.formulas.end() && pit == params.formulas.end())
        throw RuleMismatch("WEAKEN: needs ctx= or post=");
      bool modal = s.goal->kind == Formula::Kind::Box || s.goal->kind == Formula::Kind::Diamond;
      if (pit != params.formulas.end() && !modal)
        throw RuleMismatch("WEAKEN: post= needs a modal goal");
      std::vector<Sequent> out;
      std::vector<FormulaPtr> newctx = s.context;
      if (cit != params.formulas.end()) {
        if (!is_first_order(cit->second))
          throw RuleMismatch("WEAKEN: the new context must be modality-free");
        out.push_back(Sequent{s.context, cit->second});
        newctx = conjuncts(cit->second);
      }
      FormulaPtr newgoal = s.goal;
      if (pit != params.formulas.end()) {
        FormulaPtr inner = s.goal->a;
        out.push_back(Sequent{conjuncts(pit->second), inner});
        newgoal = s.goal->kind == Formula::Kind::Box ? mk_box(s.goal->prog, pit->second)
                                                     : mk_diamond(s.goal->prog, pit->second);
      }
      out.push_back(Sequent{newctx, newgoal});
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Proof checking
// ---------------------------------------------------------------------------

namespace {

struct CheckState {
  ObligationLedger obligations;
  SideConditions side;
  std::map<std::string, int> histogram;
  std::vector<std::string> experimental;
  const KernelOptions* opt;
};

std::array<bool, 4> parse_mcs_flags(const RuleParams& p) {
  auto it = p.idents.find("flags");
  std::array<bool, 4> flags{true, true, true, true};
  if (it != p.idents.end()) {
    const std::string& f = it->second;
    for (std::size_t i = 0; i < 4 && i < f.size(); ++i) flags[i] = f[i] != 'd';
  }
  return flags;
}

FormulaPtr need_formula(const RuleParams& p, const char* key, const char* rule) {
  auto it = p.formulas.find(key);
  if (it == p.formulas.end())
    throw RuleMismatch(std::string(rule) + ": missing parameter " + key + "=");
  return it->second;
}

std::vector<Sequent> apply_rule(const Sequent& s, const RuleApplication& app, CheckState& st) {
  const RuleParams& p = app.params;
  switch (app.rule) {
    case Rule::DI: return apply_DI(s, &st.side);
    case Rule::DC: return apply_DC(s, need_formula(p, "cut", "DC"));
    case Rule::DW: return apply_DW(s);
    case Rule::DII: {
      auto it = p.ints.find("n");
      long n = it == p.ints.end() ? 1 : it->second;
      return apply_DII(s, static_cast<unsigned>(n), &st.side);
    }
    case Rule::SIM: return apply_SIM(s, need_formula(p, "R", "SIM"));
    case Rule::TS: {
      auto dir = p.idents.find("dir");
      bool forward = dir == p.idents.end() || dir->second != "backward";
      return apply_TS(s, forward, p.rdd, &st.side);
    }
    case Rule::MCS: {
      bool exp = false;
      auto out = apply_MCS(s, parse_mcs_flags(p), &st.side, &exp);
      if (exp) st.experimental.push_back("MCS variant with non-default monotonicity flags");
      return out;
    }
    case Rule::RDC: return apply_RDC(s, need_formula(p, "cut", "RDC"));
    case Rule::ECP: return apply_ECP(s, &st.side);
    case Rule::SCC_BOX:
    case Rule::SCC_DIA: {
      auto it = p.ints.find("pos");
      int pos = it == p.ints.end() ? 1 : static_cast<int>(it->second);
      return apply_SCC(s, app.rule == Rule::SCC_BOX, pos);
    }
    case Rule::MID_BOX:
    case Rule::MID_DIA: {
      auto it = p.ints.find("pos");
      int pos = it == p.ints.end() ? 1 : static_cast<int>(it->second);
      return apply_MID(s, app.rule == Rule::MID_BOX, pos, &st.side);
    }
    case Rule::DCC: return apply_DCC(s, need_formula(p, "cond", "DCC"));
    case Rule::DBX_GT: {
      auto it = p.terms.find("cofactor");
      if (it == p.terms.end()) throw RuleMismatch("DBX-GT: missing parameter cofactor=");
      return apply_DBX_GT(s, it->second, &st.side);
    }
    case Rule::SPLIT: return apply_structural(s, StructuralOp::ChoiceSplit, p);
    case Rule::COMPOSE: return apply_structural(s, StructuralOp::Compose, p);
    case Rule::TEST: return apply_structural(s, StructuralOp::TestIntro, p);
    case Rule::WEAKEN: return apply_structural(s, StructuralOp::MonotoneWeaken, p);
    case Rule::ARITH: break;  // handled by the walker
  }
  return {};
}

void walk(const Sequent& seq, const ProofNode& node, CheckState& st, std::string path) {
  if (node.sequent && !sequent_equal(*node.sequent, seq)) {
    throw CheckError("sequent mismatch at " + path + "\n  expected: " +
                         print_sequent(*node.sequent) + "\n  derived:  " + print_sequent(seq),
                     path);
  }
  st.histogram[rule_name(node.rule.rule)]++;
  if (node.rule.rule == Rule::ARITH) {
    if (!node.children.empty())
      throw CheckError("ARITH takes no premises at " + path, path);
    if (!is_first_order(seq.goal) || !is_quantifier_free(seq.goal))
      throw CheckError("ARITH needs a modality-free sequent at " + path + ": " +
                           print_sequent(seq),
                       path);
    ArithVerdict v = prove_arith(flattened_context(seq), seq.goal, st.opt->arith);
    if (v.refuted())
      throw ProofRefuted("arithmetic goal refuted at " + path + ": " + print_sequent(seq),
                         v.witness, path);
    if (!v.proved()) st.obligations.register_obligation(print_sequent(seq));
    return;
  }
  std::vector<Sequent> premises;
  try {
    premises = apply_rule(seq, node.rule, st);
  } catch (const std::exception& e) {
    throw CheckError(std::string("rule ") + rule_name(node.rule.rule) + " failed at " + path +
                         "\n  on: " + print_sequent(seq) + "\n  " + e.what(),
                     path);
  }
  if (premises.size() != node.children.size()) {
    std::ostringstream os;
    os << "rule " << rule_name(node.rule.rule) << " at " << path << " produces "
       << premises.size() << " premises but the script has " << node.children.size()
       << " subtrees;\n  on: " << print_sequent(seq);
    for (std::size_t i = 0; i < premises.size(); ++i)
      os << "\n  premise " << i + 1 << ": " << print_sequent(premises[i]);
    throw CheckError(os.str(), path);
  }
  for (std::size_t i = 0; i < premises.size(); ++i) {
    walk(premises[i], node.children[i], st,
         path + "/" + rule_name(node.children[i].rule.rule) + "." + std::to_string(i + 1));
  }
}

}  // namespace

std::string Certificate::to_text() const {
  std::ostringstream os;
  os << "status: " << (unconditional ? "unconditional" : "conditional") << "\n";
  os << "rules:";
  for (auto& [name, count] : rule_histogram) os << " " << name << "=" << count;
  os << "\n";
  os << "obligations:" << (obligations.empty() ? " none" : "") << "\n";
  for (auto& o : obligations) os << "  " << o << "\n";
  os << "side_conditions:" << (side_conditions.empty() ? " none" : "") << "\n";
  for (auto& c : side_conditions) os << "  " << c << " != 0\n";
  os << "experimental:" << (experimental.empty() ? " none" : "") << "\n";
  for (auto& e : experimental) os << "  " << e << "\n";
  os << "wall_ms: " << wall_ms << "\n";
  return os.str();
}

Certificate check_proof(const Sequent& root, const ProofNode& tree, const KernelOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  CheckState st;
  st.opt = &opt;
  walk(root, tree, st, rule_name(tree.rule.rule));
  Certificate cert;
  cert.root = root;
  cert.unconditional = st.obligations.empty();
  cert.rule_histogram = st.histogram;
  cert.obligations = st.obligations.entries();
  cert.side_conditions.assign(st.side.nonzero.begin(), st.side.nonzero.end());
  std::sort(st.experimental.begin(), st.experimental.end());
  st.experimental.erase(std::unique(st.experimental.begin(), st.experimental.end()),
                        st.experimental.end());
  cert.experimental = st.experimental;
  auto t1 = std::chrono::steady_clock::now();
  cert.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return cert;
}

}  // namespace rddl
