// SPDX-License-Identifier: Apache-2.0
#include "rddl/script.hpp"

#include <fstream>
#include <sstream>

#include "rddl/parsing.hpp"

namespace rddl {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

std::optional<Rule> rule_from_name(const std::string& n) {
  static const std::map<std::string, Rule> table = {
      {"DI", Rule::DI},           {"DC", Rule::DC},
      {"DW", Rule::DW},           {"DII", Rule::DII},
      {"SIM", Rule::SIM},         {"TS", Rule::TS},
      {"MCS", Rule::MCS},         {"RDC", Rule::RDC},
      {"ECP", Rule::ECP},         {"SCC-BOX", Rule::SCC_BOX},
      {"SCC-DIA", Rule::SCC_DIA}, {"MID-BOX", Rule::MID_BOX},
      {"MID-DIA", Rule::MID_DIA}, {"DCC", Rule::DCC},
      {"DBX-GT", Rule::DBX_GT},   {"SPLIT", Rule::SPLIT},
      {"COMPOSE", Rule::COMPOSE}, {"TEST", Rule::TEST},
      {"WEAKEN", Rule::WEAKEN},   {"ARITH", Rule::ARITH}};
  auto it = table.find(n);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

enum class ParamKind { FormulaVal, TermVal, IntVal, IdentVal };

std::optional<ParamKind> param_kind(const std::string& key) {
  if (key == "cut" || key == "R" || key == "cond" || key == "ctx" || key == "post" ||
      key == "exit")
    return ParamKind::FormulaVal;
  if (key == "cofactor") return ParamKind::TermVal;
  if (key == "n" || key == "pos") return ParamKind::IntVal;
  if (key == "dir" || key == "flags") return ParamKind::IdentVal;
  return std::nullopt;
}

// rule names may carry a -SUFFIX (SCC-BOX, DBX-GT, ...)
std::string read_rule_name(Cursor& c) {
  Token t = c.expect(Tok::Ident);
  std::string name = t.text;
  if (c.at(Tok::Minus) && c.peek(1).kind == Tok::Ident) {
    std::string extended = name + "-" + c.peek(1).text;
    if (rule_from_name(extended)) {
      c.eat();
      c.eat();
      return extended;
    }
  }
  return name;
}

ProofNode parse_proof_node(Cursor& c) {
  c.expect(Tok::LParen);
  std::size_t pos = c.peek().pos;
  std::string name = read_rule_name(c);
  auto rule = rule_from_name(name);
  if (!rule) throw UnknownRule("unknown rule '" + name + "' at position " + std::to_string(pos));
  ProofNode node;
  node.rule.rule = *rule;
  // parameters: KEY '=' value
  while (c.at(Tok::Ident) && c.peek(1).kind == Tok::Eq) {
    Token key = c.eat();
    c.eat();  // '='
    auto kind = param_kind(key.text);
    if (!kind)
      throw SyntaxError(key.pos, "unknown rule parameter '" + key.text + "'");
    switch (*kind) {
      case ParamKind::FormulaVal:
        node.rule.params.formulas[key.text] = parse_formula_at(c);
        break;
      case ParamKind::TermVal:
        node.rule.params.terms[key.text] = parse_term_at(c);
        break;
      case ParamKind::IntVal: {
        Token v = c.expect(Tok::Decimal);
        node.rule.params.ints[key.text] = std::stol(v.text);
        break;
      }
      case ParamKind::IdentVal: {
        Token v = c.expect(Tok::Ident);
        node.rule.params.idents[key.text] = v.text;
        break;
      }
    }
  }
  while (c.at(Tok::LParen)) node.children.push_back(parse_proof_node(c));
  c.expect(Tok::RParen);
  return node;
}

std::vector<ScriptParam> parse_decls(Cursor& c) {
  std::vector<ScriptParam> out;
  while (c.at_ident("param")) {
    c.eat();
    Token name = c.expect(Tok::Ident);
    ScriptParam p;
    p.name = name.text;
    if (c.accept(Tok::Eq)) {
      bool neg = c.accept(Tok::Minus);
      Token v = c.expect(Tok::Decimal);
      Rational r = rational_from_decimal(v.text);
      p.value = neg ? -r : r;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

ProofScript parse_script(const std::string& text) {
  auto toks = tokenize(text);
  Cursor c{&toks, 0};
  ProofScript script;
  script.params = parse_decls(c);
  if (!c.accept_ident("sequent"))
    throw SyntaxError(c.peek().pos, "expected 'sequent'");
  c.expect(Tok::LBrace);
  if (!c.accept_ident("assume")) throw SyntaxError(c.peek().pos, "expected 'assume'");
  std::vector<FormulaPtr> ctx;
  ctx.push_back(parse_formula_at(c));
  while (c.accept(Tok::Semi)) {
    if (c.at_ident("goal")) break;
    ctx.push_back(parse_formula_at(c));
  }
  if (!c.accept_ident("goal")) throw SyntaxError(c.peek().pos, "expected 'goal'");
  FormulaPtr goal = parse_formula_at(c);
  c.expect(Tok::RBrace);
  script.sequent = mk_sequent(std::move(ctx), std::move(goal));
  script.proof = parse_proof_node(c);
  if (!c.at(Tok::End))
    throw SyntaxError(c.peek().pos, "trailing input after the proof tree");
  return script;
}

ProofScript load_script(const std::string& path) { return parse_script(read_file(path)); }

// ---------------------------------------------------------------------------
// RDD model files
// ---------------------------------------------------------------------------

RddModel parse_rdd_model(const std::string& text) {
  auto toks = tokenize(text);
  Cursor c{&toks, 0};
  RddModel m;
  m.gamma = mk_true();
  m.params = parse_decls(c);
  if (c.accept_ident("assume")) {
    m.gamma = parse_formula_at(c);
    while (c.accept(Tok::Semi)) m.gamma = mk_and(m.gamma, parse_formula_at(c));
  }
  if (c.accept_ident("box")) {
    while (true) {
      Token v = c.expect(Tok::Ident);
      if (!c.accept_ident("in")) throw SyntaxError(c.peek().pos, "expected 'in'");
      c.expect(Tok::LBracket);
      TermPtr lo = parse_term_at(c);
      c.expect(Tok::Comma);
      TermPtr hi = parse_term_at(c);
      c.expect(Tok::RBracket);
      m.box[v.text] = {eval_term_numeric(lo, {}), eval_term_numeric(hi, {})};
      if (!c.accept(Tok::Semi)) break;
      if (!c.at(Tok::Ident) || c.at_ident("rdd")) break;
    }
  }
  m.rdd = parse_rdd_at(c);
  if (!c.at(Tok::End)) throw SyntaxError(c.peek().pos, "trailing input");
  return m;
}

RddModel load_rdd_model(const std::string& path) { return parse_rdd_model(read_file(path)); }

Box RddModel::full_box(double lo, double hi) const {
  Box b = box;
  std::set<std::string> vars;
  if (rdd) {
    for (auto& v : free_variables(rdd->left)) vars.insert(v);
    for (auto& v : free_variables(rdd->right)) vars.insert(v);
    for (auto& v : free_variables(rdd->exit)) vars.insert(v);
    for (auto& v : free_variables(rdd->post)) vars.insert(v);
  }
  for (auto& v : free_variables(gamma)) vars.insert(v);
  for (auto& v : vars)
    if (!b.count(v)) b[v] = {lo, hi};
  for (auto& p : params) {
    if (p.value) {
      double d = rational_to_double(*p.value);
      b[p.name] = {d, d};
    }
  }
  return b;
}

FormulaPtr RddModel::full_gamma() const {
  FormulaPtr g = gamma;
  for (auto& p : params)
    if (p.value) g = mk_and(g, mk_cmp(mk_var(p.name), CmpOp::Eq, mk_const(*p.value)));
  return g;
}

Dynamics load_dynamics_model(const std::string& path) {
  std::string text = read_file(path);
  auto toks = tokenize(text);
  Cursor c{&toks, 0};
  // skip a parameter preamble if present
  parse_decls(c);
  if (c.at(Tok::LBrace)) {
    c.eat();
    Dynamics d = parse_dynamics_body_at(c);
    c.expect(Tok::RBrace);
    if (!c.at(Tok::End)) throw SyntaxError(c.peek().pos, "trailing input");
    return d;
  }
  Dynamics d = parse_dynamics_body_at(c);
  if (!c.at(Tok::End)) throw SyntaxError(c.peek().pos, "trailing input");
  return d;
}

std::vector<ManifestEntry> corpus_manifest() {
  return {
      {"phi_C.rdl", true, 0,
       "ARITH=22 COMPOSE=1 DC=8 DI=10 DII=1 DW=11 TEST=1 TS=1"},
      {"phi_C_mcs.rdl", true, 0,
       "ARITH=22 COMPOSE=1 DC=4 DI=11 DW=10 MCS=1 TEST=2 TS=1"},
      {"drag.rdl", true, 0,
       "ARITH=18 COMPOSE=1 DBX-GT=4 DC=6 DCC=1 DI=3 DII=1 DW=6 TEST=1 TS=1 WEAKEN=4"},
      {"decay_6.rdl", true, 0, ""},
      {"decay_7.rdl", true, 0, ""},
      {"decay_8.rdl", true, 0, ""},
      {"decay_9.rdl", true, 0, ""},
  };
}

}  // namespace rddl
