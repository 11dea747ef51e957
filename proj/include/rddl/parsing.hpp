// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rddl/lexer.hpp"
#include "rddl/syntax.hpp"

namespace rddl {

/// Shared token cursor for the expression grammar and the script grammar.
struct Cursor {
  const std::vector<Token>* toks;
  std::size_t i = 0;

  const Token& peek(std::size_t k = 0) const {
    std::size_t j = i + k;
    if (j >= toks->size()) j = toks->size() - 1;
    return (*toks)[j];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_ident(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  Token eat() { return (*toks)[i < toks->size() - 1 ? i++ : i]; }
  bool accept(Tok k) {
    if (at(k)) { eat(); return true; }
    return false;
  }
  bool accept_ident(const char* kw) {
    if (at_ident(kw)) { eat(); return true; }
    return false;
  }
  Token expect(Tok k) {
    if (!at(k)) throw SyntaxError(peek().pos, std::string("expected ") + token_name(k) +
                                  ", found '" + peek().text + "'", token_name(k));
    return eat();
  }
};

TermPtr parse_term_at(Cursor& c);
FormulaPtr parse_formula_at(Cursor& c);
ProgramPtr parse_program_at(Cursor& c);
/// ODE list with optional '&' constraint; stops before '}'/'||'/end.
Dynamics parse_dynamics_body_at(Cursor& c);
RddFormula parse_rdd_at(Cursor& c);

}  // namespace rddl
