// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rddl {

enum class Tok {
  Ident, Decimal,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Lt, Gt, Le, Ge, Eq, Bang, Amp, Bar, BarBar, Arrow,
  Plus, PlusPlus, Minus, Star, Slash, Caret, Prime,
  Semi, Comma, Question, Dot,
  End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

/// Tokenizes the whole input eagerly. Comments run from '//' to end of line.
std::vector<Token> tokenize(const std::string& input);

const char* token_name(Tok t);

}  // namespace rddl
