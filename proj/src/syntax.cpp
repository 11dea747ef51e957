// SPDX-License-Identifier: Apache-2.0
#include "rddl/syntax.hpp"

#include <algorithm>
#include <sstream>

#include "rddl/parsing.hpp"

namespace rddl {

// ---------------------------------------------------------------------------
// Term constructors
// ---------------------------------------------------------------------------

namespace {
TermPtr node(Term t) { return std::make_shared<const Term>(std::move(t)); }
FormulaPtr fnode(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
ProgramPtr pnode(Program p) { return std::make_shared<const Program>(std::move(p)); }
}  // namespace

TermPtr mk_var(const std::string& name) {
  Term t; t.kind = Term::Kind::Variable; t.name = name;
  return node(std::move(t));
}

TermPtr mk_const(const Rational& value) {
  if (value < 0) {
    Term t; t.kind = Term::Kind::Constant; t.value = -value;
    return mk_neg(node(std::move(t)));
  }
  Term t; t.kind = Term::Kind::Constant; t.value = value;
  return node(std::move(t));
}

TermPtr mk_neg(TermPtr x) { Term t; t.kind = Term::Kind::Neg; t.a = std::move(x); return node(std::move(t)); }
TermPtr mk_add(TermPtr a, TermPtr b) { Term t; t.kind = Term::Kind::Add; t.a = std::move(a); t.b = std::move(b); return node(std::move(t)); }
TermPtr mk_sub(TermPtr a, TermPtr b) { Term t; t.kind = Term::Kind::Sub; t.a = std::move(a); t.b = std::move(b); return node(std::move(t)); }
TermPtr mk_mul(TermPtr a, TermPtr b) { Term t; t.kind = Term::Kind::Mul; t.a = std::move(a); t.b = std::move(b); return node(std::move(t)); }
TermPtr mk_div(TermPtr a, TermPtr b) { Term t; t.kind = Term::Kind::Div; t.a = std::move(a); t.b = std::move(b); return node(std::move(t)); }
TermPtr mk_pow(TermPtr a, unsigned e) { Term t; t.kind = Term::Kind::Pow; t.a = std::move(a); t.exponent = e; return node(std::move(t)); }

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Variable: return a->name == b->name;
    case Term::Kind::Constant: return a->value == b->value;
    case Term::Kind::Neg: return term_equal(a->a, b->a);
    case Term::Kind::Pow: return a->exponent == b->exponent && term_equal(a->a, b->a);
    default: return term_equal(a->a, b->a) && term_equal(a->b, b->b);
  }
}

// ---------------------------------------------------------------------------
// Formula constructors (normal form enforced here)
// ---------------------------------------------------------------------------

FormulaPtr mk_true() { Formula f; f.kind = Formula::Kind::True; return fnode(std::move(f)); }
FormulaPtr mk_false() { Formula f; f.kind = Formula::Kind::False; return fnode(std::move(f)); }

namespace {
bool term_is_literal_const(const TermPtr& t, Rational* out) {
  if (t->kind == Term::Kind::Constant) { *out = t->value; return true; }
  if (t->kind == Term::Kind::Neg && t->a->kind == Term::Kind::Constant) {
    *out = -t->a->value;
    return true;
  }
  return false;
}
}  // namespace

FormulaPtr mk_cmp(TermPtr l, CmpOp op, TermPtr r) {
  Rational cl, cr;
  if (term_is_literal_const(l, &cl) && term_is_literal_const(r, &cr)) {
    bool v = op == CmpOp::Eq ? cl == cr : op == CmpOp::Ge ? cl >= cr : cl > cr;
    return v ? mk_true() : mk_false();
  }
  Formula f; f.kind = Formula::Kind::Cmp; f.lhs = std::move(l); f.rhs = std::move(r); f.op = op;
  return fnode(std::move(f));
}

FormulaPtr mk_cmp_raw(TermPtr l, const std::string& op, TermPtr r) {
  if (op == "=") return mk_cmp(std::move(l), CmpOp::Eq, std::move(r));
  if (op == ">=") return mk_cmp(std::move(l), CmpOp::Ge, std::move(r));
  if (op == ">") return mk_cmp(std::move(l), CmpOp::Gt, std::move(r));
  if (op == "<=") return mk_cmp(std::move(r), CmpOp::Ge, std::move(l));
  if (op == "<") return mk_cmp(std::move(r), CmpOp::Gt, std::move(l));
  throw std::invalid_argument("unknown comparison " + op);
}

FormulaPtr mk_not(FormulaPtr f) {
  switch (f->kind) {
    case Formula::Kind::True: return mk_false();
    case Formula::Kind::False: return mk_true();
    case Formula::Kind::Not: return f->a;
    case Formula::Kind::Cmp:
      if (f->op == CmpOp::Ge) return mk_cmp(f->rhs, CmpOp::Gt, f->lhs);
      if (f->op == CmpOp::Gt) return mk_cmp(f->rhs, CmpOp::Ge, f->lhs);
      break;  // negated equality stays a Not node
    default: break;
  }
  Formula g; g.kind = Formula::Kind::Not; g.a = std::move(f);
  return fnode(std::move(g));
}

FormulaPtr mk_and(FormulaPtr a, FormulaPtr b) {
  if (a->kind == Formula::Kind::True) return b;
  if (b->kind == Formula::Kind::True) return a;
  if (a->kind == Formula::Kind::False || b->kind == Formula::Kind::False) return mk_false();
  Formula f; f.kind = Formula::Kind::And; f.a = std::move(a); f.b = std::move(b);
  return fnode(std::move(f));
}

FormulaPtr mk_or(FormulaPtr a, FormulaPtr b) { return mk_not(mk_and(mk_not(a), mk_not(b))); }
FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b) { return mk_not(mk_and(std::move(a), mk_not(b))); }

FormulaPtr mk_forall(const std::string& var, FormulaPtr f) {
  Formula g; g.kind = Formula::Kind::Forall; g.var = var; g.a = std::move(f);
  return fnode(std::move(g));
}

FormulaPtr mk_box(ProgramPtr p, FormulaPtr f) {
  Formula g; g.kind = Formula::Kind::Box; g.prog = std::move(p); g.a = std::move(f);
  return fnode(std::move(g));
}

FormulaPtr mk_diamond(ProgramPtr p, FormulaPtr f) {
  Formula g; g.kind = Formula::Kind::Diamond; g.prog = std::move(p); g.a = std::move(f);
  return fnode(std::move(g));
}

ProgramPtr mk_test(FormulaPtr f) {
  Program p; p.kind = Program::Kind::Test; p.test = std::move(f);
  return pnode(std::move(p));
}

ProgramPtr mk_dyn(Dynamics d) {
  Program p; p.kind = Program::Kind::Dyn; p.dyn = std::move(d);
  return pnode(std::move(p));
}

ProgramPtr mk_seq(ProgramPtr a, ProgramPtr b) {
  Program p; p.kind = Program::Kind::Seq; p.a = std::move(a); p.b = std::move(b);
  return pnode(std::move(p));
}

ProgramPtr mk_choice(ProgramPtr a, ProgramPtr b) {
  Program p; p.kind = Program::Kind::Choice; p.a = std::move(a); p.b = std::move(b);
  return pnode(std::move(p));
}

bool dynamics_equal(const Dynamics& a, const Dynamics& b) {
  if (a.odes.size() != b.odes.size()) return false;
  for (std::size_t i = 0; i < a.odes.size(); ++i) {
    if (a.odes[i].first != b.odes[i].first) return false;
    if (!term_equal(a.odes[i].second, b.odes[i].second)) return false;
  }
  return formula_equal(a.constraint, b.constraint);
}

bool program_equal(const ProgramPtr& a, const ProgramPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Program::Kind::Test: return formula_equal(a->test, b->test);
    case Program::Kind::Dyn: return dynamics_equal(a->dyn, b->dyn);
    default: return program_equal(a->a, b->a) && program_equal(a->b, b->b);
  }
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return true;
    case Formula::Kind::Cmp:
      return a->op == b->op && term_equal(a->lhs, b->lhs) && term_equal(a->rhs, b->rhs);
    case Formula::Kind::Not: return formula_equal(a->a, b->a);
    case Formula::Kind::And: return formula_equal(a->a, b->a) && formula_equal(a->b, b->b);
    case Formula::Kind::Forall: return a->var == b->var && formula_equal(a->a, b->a);
    case Formula::Kind::Box:
    case Formula::Kind::Diamond:
      return program_equal(a->prog, b->prog) && formula_equal(a->a, b->a);
  }
  return false;
}

bool match_implies(const FormulaPtr& f, FormulaPtr* antecedent, FormulaPtr* consequent) {
  if (f->kind != Formula::Kind::Not || f->a->kind != Formula::Kind::And) return false;
  const auto& conj = f->a;
  *antecedent = conj->a;
  *consequent = mk_not(conj->b);
  return true;
}

bool match_or(const FormulaPtr& f, FormulaPtr* left, FormulaPtr* right) {
  if (f->kind != Formula::Kind::Not || f->a->kind != Formula::Kind::And) return false;
  *left = mk_not(f->a->a);
  *right = mk_not(f->a->b);
  return true;
}

bool is_first_order(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Box:
    case Formula::Kind::Diamond: return false;
    case Formula::Kind::Not: return is_first_order(f->a);
    case Formula::Kind::And: return is_first_order(f->a) && is_first_order(f->b);
    case Formula::Kind::Forall: return is_first_order(f->a);
    default: return true;
  }
}

bool is_quantifier_free(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Forall: return false;
    case Formula::Kind::Not: return is_quantifier_free(f->a);
    case Formula::Kind::And: return is_quantifier_free(f->a) && is_quantifier_free(f->b);
    case Formula::Kind::Box:
    case Formula::Kind::Diamond: return is_quantifier_free(f->a);
    default: return true;
  }
}

std::vector<FormulaPtr> conjuncts(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  if (f->kind == Formula::Kind::And) {
    auto l = conjuncts(f->a);
    auto r = conjuncts(f->b);
    out.insert(out.end(), l.begin(), l.end());
    out.insert(out.end(), r.begin(), r.end());
  } else if (f->kind != Formula::Kind::True) {
    out.push_back(f);
  }
  return out;
}

std::set<std::string> Dynamics::ode_variables() const {
  std::set<std::string> vs;
  for (auto& [v, rhs] : odes) vs.insert(v);
  return vs;
}

RddFormula::RddFormula(Dynamics l, Dynamics r, FormulaPtr e, FormulaPtr p)
    : left(std::move(l)), right(std::move(r)), exit(std::move(e)), post(std::move(p)) {
  auto lv = left.ode_variables();
  auto rv = right.ode_variables();
  for (auto& v : lv) {
    if (rv.count(v))
      throw DisjointnessError("rdd sides share the differential variable '" + v + "'");
  }
}

FormulaPtr desugar_rdd(const RddFormula& a) {
  return mk_box(mk_seq(mk_seq(mk_dyn(a.left), mk_dyn(a.right)), mk_test(a.exit)), a.post);
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

namespace {
void collect(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Variable: out.insert(t->name); break;
    case Term::Kind::Constant: break;
    case Term::Kind::Neg:
    case Term::Kind::Pow: collect(t->a, out); break;
    default:
      collect(t->a, out);
      collect(t->b, out);
  }
}

void collect(const FormulaPtr& f, std::set<std::string>& out);

void collect(const Dynamics& d, std::set<std::string>& out) {
  for (auto& [v, rhs] : d.odes) {
    out.insert(v);
    collect(rhs, out);
  }
  collect(d.constraint, out);
}

void collect(const ProgramPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case Program::Kind::Test: collect(p->test, out); break;
    case Program::Kind::Dyn: collect(p->dyn, out); break;
    default:
      collect(p->a, out);
      collect(p->b, out);
  }
}

void collect(const FormulaPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: break;
    case Formula::Kind::Cmp:
      collect(f->lhs, out);
      collect(f->rhs, out);
      break;
    case Formula::Kind::Not: collect(f->a, out); break;
    case Formula::Kind::And:
      collect(f->a, out);
      collect(f->b, out);
      break;
    case Formula::Kind::Forall: {
      std::set<std::string> inner;
      collect(f->a, inner);
      inner.erase(f->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case Formula::Kind::Box:
    case Formula::Kind::Diamond:
      collect(f->prog, out);
      collect(f->a, out);
      break;
  }
}
}  // namespace

std::set<std::string> free_variables(const TermPtr& t) { std::set<std::string> s; collect(t, s); return s; }
std::set<std::string> free_variables(const FormulaPtr& f) { std::set<std::string> s; collect(f, s); return s; }
std::set<std::string> free_variables(const ProgramPtr& p) { std::set<std::string> s; collect(p, s); return s; }
std::set<std::string> free_variables(const Dynamics& d) { std::set<std::string> s; collect(d, s); return s; }

std::set<std::string> written_variables(const ProgramPtr& p) {
  switch (p->kind) {
    case Program::Kind::Test: return {};
    case Program::Kind::Dyn: return p->dyn.ode_variables();
    default: {
      auto a = written_variables(p->a);
      auto b = written_variables(p->b);
      a.insert(b.begin(), b.end());
      return a;
    }
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

bool is_keyword(const std::string& s) {
  return s == "true" || s == "false" || s == "forall" || s == "rdd" || s == "exit" || s == "post";
}

TermPtr parse_term_primary(Cursor& c) {
  if (c.at(Tok::LParen)) {
    c.eat();
    TermPtr t = parse_term_at(c);
    c.expect(Tok::RParen);
    return t;
  }
  if (c.at(Tok::Minus)) {
    c.eat();
    return mk_neg(parse_term_primary(c));
  }
  if (c.at(Tok::Decimal)) {
    Token t = c.eat();
    return mk_const(rational_from_decimal(t.text));
  }
  if (c.at(Tok::Ident) && !is_keyword(c.peek().text)) {
    Token t = c.eat();
    return mk_var(t.text);
  }
  throw SyntaxError(c.peek().pos, "expected term, found '" + c.peek().text + "'",
                    "term");
}

TermPtr parse_term_pow(Cursor& c) {
  TermPtr base = parse_term_primary(c);
  while (c.at(Tok::Caret)) {
    c.eat();
    Token e = c.expect(Tok::Decimal);
    if (e.text.find('.') != std::string::npos)
      throw SyntaxError(e.pos, "exponent must be a nonnegative integer");
    unsigned long v = std::stoul(e.text);
    base = mk_pow(base, static_cast<unsigned>(v));
  }
  return base;
}

TermPtr parse_term_unary(Cursor& c) {
  if (c.at(Tok::Minus)) {
    c.eat();
    return mk_neg(parse_term_unary(c));
  }
  return parse_term_pow(c);
}

TermPtr parse_term_mul(Cursor& c) {
  TermPtr l = parse_term_unary(c);
  while (c.at(Tok::Star) || c.at(Tok::Slash)) {
    Tok k = c.eat().kind;
    TermPtr r = parse_term_unary(c);
    l = (k == Tok::Star) ? mk_mul(l, r) : mk_div(l, r);
  }
  return l;
}

TermPtr parse_term_add(Cursor& c) {
  TermPtr l = parse_term_mul(c);
  while (c.at(Tok::Plus) || c.at(Tok::Minus)) {
    Tok k = c.eat().kind;
    TermPtr r = parse_term_mul(c);
    l = (k == Tok::Plus) ? mk_add(l, r) : mk_sub(l, r);
  }
  return l;
}

bool at_cmp_op(const Cursor& c) {
  switch (c.peek().kind) {
    case Tok::Eq: case Tok::Le: case Tok::Lt: case Tok::Ge: case Tok::Gt: return true;
    default: return false;
  }
}

std::string cmp_text(Tok k) {
  switch (k) {
    case Tok::Eq: return "=";
    case Tok::Le: return "<=";
    case Tok::Lt: return "<";
    case Tok::Ge: return ">=";
    default: return ">";
  }
}

// cmp with chains: `0 = x = x#` becomes `0 = x & x = x#`
FormulaPtr parse_comparison(Cursor& c) {
  TermPtr first = parse_term_add(c);
  if (!at_cmp_op(c))
    throw SyntaxError(c.peek().pos, "expected comparison operator", "=, <=, <, >=, >");
  FormulaPtr acc;
  TermPtr prev = first;
  while (at_cmp_op(c)) {
    std::string op = cmp_text(c.eat().kind);
    TermPtr next = parse_term_add(c);
    FormulaPtr link = mk_cmp_raw(prev, op, next);
    acc = acc ? mk_and(acc, link) : link;
    prev = next;
  }
  return acc;
}

FormulaPtr parse_formula_unary(Cursor& c);

FormulaPtr parse_formula_atom(Cursor& c) {
  if (c.accept_ident("true")) return mk_true();
  if (c.accept_ident("false")) return mk_false();
  if (c.at_ident("rdd")) return desugar_rdd(parse_rdd_at(c));
  if (c.at(Tok::LBracket)) {
    c.eat();
    ProgramPtr p = parse_program_at(c);
    c.expect(Tok::RBracket);
    return mk_box(p, parse_formula_unary(c));
  }
  if (c.at(Tok::Lt)) {
    c.eat();
    ProgramPtr p = parse_program_at(c);
    c.expect(Tok::Gt);
    return mk_diamond(p, parse_formula_unary(c));
  }
  if (c.at(Tok::LParen)) {
    // could be a parenthesized formula or a parenthesized term inside a cmp
    std::size_t save = c.i;
    try {
      c.eat();
      FormulaPtr f = parse_formula_at(c);
      c.expect(Tok::RParen);
      return f;
    } catch (const SyntaxError&) {
      c.i = save;
      return parse_comparison(c);
    }
  }
  return parse_comparison(c);
}

FormulaPtr parse_formula_unary(Cursor& c) {
  if (c.at(Tok::Bang)) {
    c.eat();
    return mk_not(parse_formula_unary(c));
  }
  if (c.at_ident("forall")) {
    c.eat();
    Token v = c.expect(Tok::Ident);
    c.expect(Tok::Dot);
    return mk_forall(v.text, parse_formula_at(c));
  }
  return parse_formula_atom(c);
}

FormulaPtr parse_formula_and(Cursor& c) {
  FormulaPtr l = parse_formula_unary(c);
  while (c.at(Tok::Amp)) {
    c.eat();
    l = mk_and(l, parse_formula_unary(c));
  }
  return l;
}

FormulaPtr parse_formula_or(Cursor& c) {
  FormulaPtr l = parse_formula_and(c);
  while (c.at(Tok::Bar)) {
    c.eat();
    l = mk_or(l, parse_formula_and(c));
  }
  return l;
}

ProgramPtr parse_program_primary(Cursor& c) {
  if (c.at(Tok::Question)) {
    c.eat();
    return mk_test(parse_formula_at(c));
  }
  if (c.at(Tok::LBrace)) {
    c.eat();
    Dynamics d = parse_dynamics_body_at(c);
    c.expect(Tok::RBrace);
    return mk_dyn(std::move(d));
  }
  if (c.at(Tok::LParen)) {
    c.eat();
    ProgramPtr p = parse_program_at(c);
    c.expect(Tok::RParen);
    return p;
  }
  throw SyntaxError(c.peek().pos, "expected program, found '" + c.peek().text + "'",
                    "?, {, (");
}

ProgramPtr parse_program_seq(Cursor& c) {
  ProgramPtr l = parse_program_primary(c);
  while (c.at(Tok::Semi)) {
    c.eat();
    l = mk_seq(l, parse_program_primary(c));
  }
  return l;
}

}  // namespace

FormulaPtr parse_formula_at(Cursor& c) {
  FormulaPtr l = parse_formula_or(c);
  if (c.at(Tok::Arrow)) {
    c.eat();
    return mk_implies(l, parse_formula_at(c));
  }
  return l;
}

TermPtr parse_term_at(Cursor& c) { return parse_term_add(c); }

ProgramPtr parse_program_at(Cursor& c) {
  ProgramPtr l = parse_program_seq(c);
  while (c.at(Tok::PlusPlus)) {
    c.eat();
    l = mk_choice(l, parse_program_seq(c));
  }
  return l;
}

Dynamics parse_dynamics_body_at(Cursor& c) {
  Dynamics d;
  d.constraint = mk_true();
  while (true) {
    Token v = c.expect(Tok::Ident);
    if (is_keyword(v.text)) throw SyntaxError(v.pos, "'" + v.text + "' cannot name an ODE variable");
    c.expect(Tok::Prime);
    c.expect(Tok::Eq);
    TermPtr rhs = parse_term_at(c);
    for (auto& [name, r] : d.odes)
      if (name == v.text) throw SyntaxError(v.pos, "duplicate ODE for variable '" + v.text + "'");
    d.odes.emplace_back(v.text, rhs);
    if (c.accept(Tok::Comma)) continue;
    break;
  }
  if (c.accept(Tok::Amp)) {
    FormulaPtr q = parse_formula_at(c);
    if (!is_first_order(q))
      throw SyntaxError(c.peek().pos, "evolution domain constraint must be first-order");
    d.constraint = q;
  }
  return d;
}

RddFormula parse_rdd_at(Cursor& c) {
  std::size_t pos = c.peek().pos;
  if (!c.accept_ident("rdd")) throw SyntaxError(pos, "expected 'rdd'");
  c.expect(Tok::LBrace);
  Dynamics left = parse_dynamics_body_at(c);
  c.expect(Tok::BarBar);
  Dynamics right = parse_dynamics_body_at(c);
  c.expect(Tok::RBrace);
  if (!c.accept_ident("exit")) throw SyntaxError(c.peek().pos, "expected 'exit'");
  FormulaPtr e = parse_formula_at(c);
  if (!c.accept_ident("post")) throw SyntaxError(c.peek().pos, "expected 'post'");
  FormulaPtr b = parse_formula_at(c);
  return RddFormula(std::move(left), std::move(right), std::move(e), std::move(b));
}

namespace {
template <typename F>
auto parse_whole(const std::string& text, F&& f) {
  auto toks = tokenize(text);
  Cursor c{&toks, 0};
  auto result = f(c);
  if (!c.at(Tok::End))
    throw SyntaxError(c.peek().pos, "trailing input '" + c.peek().text + "'");
  return result;
}
}  // namespace

TermPtr parse_term(const std::string& text) { return parse_whole(text, parse_term_at); }
FormulaPtr parse_formula(const std::string& text) { return parse_whole(text, parse_formula_at); }
ProgramPtr parse_program(const std::string& text) { return parse_whole(text, parse_program_at); }
RddFormula parse_rdd(const std::string& text) { return parse_whole(text, parse_rdd_at); }
Dynamics parse_dynamics(const std::string& text) { return parse_whole(text, parse_dynamics_body_at); }

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

// term precedences: add 1, mul 2, unary-neg 3, pow 4, atom 5
void print_term_rec(std::ostream& os, const TermPtr& t, int parent, bool right_operand) {
  int prec;
  switch (t->kind) {
    case Term::Kind::Add:
    case Term::Kind::Sub: prec = 1; break;
    case Term::Kind::Mul:
    case Term::Kind::Div: prec = 2; break;
    case Term::Kind::Neg: prec = 3; break;
    case Term::Kind::Pow: prec = 4; break;
    default: prec = 5; break;
  }
  bool parens = prec < parent || (prec == parent && right_operand &&
                                  (t->kind == Term::Kind::Add || t->kind == Term::Kind::Sub ||
                                   t->kind == Term::Kind::Mul || t->kind == Term::Kind::Div));
  if (parens) os << "(";
  switch (t->kind) {
    case Term::Kind::Variable: os << t->name; break;
    case Term::Kind::Constant: os << rational_to_string(t->value); break;
    case Term::Kind::Neg:
      os << "-";
      print_term_rec(os, t->a, 3, true);
      break;
    case Term::Kind::Add:
      print_term_rec(os, t->a, 1, false); os << " + "; print_term_rec(os, t->b, 1, true);
      break;
    case Term::Kind::Sub:
      print_term_rec(os, t->a, 1, false); os << " - "; print_term_rec(os, t->b, 1, true);
      break;
    case Term::Kind::Mul:
      print_term_rec(os, t->a, 2, false); os << " * "; print_term_rec(os, t->b, 2, true);
      break;
    case Term::Kind::Div:
      print_term_rec(os, t->a, 2, false); os << " / "; print_term_rec(os, t->b, 2, true);
      break;
    case Term::Kind::Pow:
      print_term_rec(os, t->a, 5, false);
      os << "^" << t->exponent;
      break;
  }
  if (parens) os << ")";
}

const char* cmp_str(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    default: return ">";
  }
}

void print_program_rec(std::ostream& os, const ProgramPtr& p, int parent,
                       bool in_diamond = false);

// formula precedences: -> 1, | 2, & 3, unary 4, atom 5
void print_formula_rec(std::ostream& os, const FormulaPtr& f, int parent) {
  FormulaPtr x, y;
  if (match_or(f, &x, &y) && (x->kind == Formula::Kind::Cmp || x->kind == Formula::Kind::Not ||
                              x->kind == Formula::Kind::And || x->kind == Formula::Kind::True ||
                              x->kind == Formula::Kind::False)) {
    // prefer `a | b` over `!(...)` when both disjuncts are first-order renderable
    bool parens = 2 < parent;
    if (parens) os << "(";
    print_formula_rec(os, x, 2);
    os << " | ";
    print_formula_rec(os, y, 2);
    if (parens) os << ")";
    return;
  }
  switch (f->kind) {
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Cmp:
      print_term_rec(os, f->lhs, 0, false);
      os << " " << cmp_str(f->op) << " ";
      print_term_rec(os, f->rhs, 0, false);
      return;
    case Formula::Kind::Not: {
      bool parens = 4 < parent;
      if (parens) os << "(";
      os << "!";
      int inner = 5;
      if (f->a->kind == Formula::Kind::Cmp || f->a->kind == Formula::Kind::And) {
        os << "(";
        print_formula_rec(os, f->a, 0);
        os << ")";
      } else {
        print_formula_rec(os, f->a, inner);
      }
      if (parens) os << ")";
      return;
    }
    case Formula::Kind::And: {
      bool parens = 3 < parent;
      if (parens) os << "(";
      print_formula_rec(os, f->a, 3);
      os << " & ";
      print_formula_rec(os, f->b, 3);
      if (parens) os << ")";
      return;
    }
    case Formula::Kind::Forall: {
      bool parens = 1 < parent;
      if (parens) os << "(";
      os << "forall " << f->var << ". ";
      print_formula_rec(os, f->a, 1);
      if (parens) os << ")";
      return;
    }
    case Formula::Kind::Box:
      os << "[";
      print_program_rec(os, f->prog, 0);
      os << "] ";
      print_formula_rec(os, f->a, 4);
      return;
    case Formula::Kind::Diamond:
      os << "<";
      print_program_rec(os, f->prog, 0, true);
      os << "> ";
      print_formula_rec(os, f->a, 4);
      return;
  }
}

void print_dynamics_body(std::ostream& os, const Dynamics& d) {
  bool first = true;
  for (auto& [v, rhs] : d.odes) {
    if (!first) os << ", ";
    first = false;
    os << v << "' = ";
    print_term_rec(os, rhs, 0, false);
  }
  if (d.constraint->kind != Formula::Kind::True) {
    os << " & ";
    print_formula_rec(os, d.constraint, 3);
  }
}

// program precedences: ++ 1, ; 2, atom 3. Inside a diamond, test bodies are
// parenthesized so a trailing comparison cannot swallow the closing '>'.
void print_program_rec(std::ostream& os, const ProgramPtr& p, int parent, bool in_diamond) {
  switch (p->kind) {
    case Program::Kind::Test:
      os << "?";
      if (in_diamond) {
        os << "(";
        print_formula_rec(os, p->test, 0);
        os << ")";
      } else {
        print_formula_rec(os, p->test, 3);
      }
      return;
    case Program::Kind::Dyn:
      os << "{";
      print_dynamics_body(os, p->dyn);
      os << "}";
      return;
    case Program::Kind::Seq: {
      bool parens = 2 < parent;
      if (parens) os << "(";
      print_program_rec(os, p->a, 2, in_diamond);
      os << "; ";
      print_program_rec(os, p->b, 2, in_diamond);
      if (parens) os << ")";
      return;
    }
    case Program::Kind::Choice: {
      bool parens = 1 < parent;
      if (parens) os << "(";
      print_program_rec(os, p->a, 1, in_diamond);
      os << " ++ ";
      print_program_rec(os, p->b, 1, in_diamond);
      if (parens) os << ")";
      return;
    }
  }
}

}  // namespace

std::string print_term(const TermPtr& t) {
  std::ostringstream os;
  print_term_rec(os, t, 0, false);
  return os.str();
}

std::string print_formula(const FormulaPtr& f) {
  std::ostringstream os;
  print_formula_rec(os, f, 0);
  return os.str();
}

std::string print_program(const ProgramPtr& p) {
  std::ostringstream os;
  print_program_rec(os, p, 0);
  return os.str();
}

std::string print_dynamics(const Dynamics& d) {
  std::ostringstream os;
  os << "{";
  print_dynamics_body(os, d);
  os << "}";
  return os.str();
}

}  // namespace rddl
