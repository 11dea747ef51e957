// SPDX-License-Identifier: Apache-2.0
#include "rddl/lexer.hpp"

#include "rddl/syntax.hpp"

#include <cctype>

namespace rddl {

const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Decimal: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::Le: return "'<='";
    case Tok::Ge: return "'>='";
    case Tok::Eq: return "'='";
    case Tok::Bang: return "'!'";
    case Tok::Amp: return "'&'";
    case Tok::Bar: return "'|'";
    case Tok::BarBar: return "'||'";
    case Tok::Arrow: return "'->'";
    case Tok::Plus: return "'+'";
    case Tok::PlusPlus: return "'++'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::Prime: return "'''";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Question: return "'?'";
    case Tok::Dot: return "'.'";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(const std::string& in) {
  std::vector<Token> out;
  std::size_t i = 0, n = in.size();
  auto push = [&](Tok k, std::size_t start, std::size_t len) {
    out.push_back(Token{k, in.substr(start, len), start});
  };
  while (i < n) {
    char c = in[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (c == '/' && i + 1 < n && in[i + 1] == '/') {
      while (i < n && in[i] != '\n') ++i;
      continue;
    }
    std::size_t s = i;
    if (std::isalpha(static_cast<unsigned char>(c))) {
      ++i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_')) ++i;
      if (i < n && in[i] == '#') ++i;
      push(Tok::Ident, s, i - s);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ++i;
      while (i < n && std::isdigit(static_cast<unsigned char>(in[i]))) ++i;
      if (i + 1 < n && in[i] == '.' && std::isdigit(static_cast<unsigned char>(in[i + 1]))) {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(in[i]))) ++i;
      }
      push(Tok::Decimal, s, i - s);
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < n && in[i + 1] == b; };
    if (two('<', '=')) { push(Tok::Le, s, 2); i += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge, s, 2); i += 2; continue; }
    if (two('-', '>')) { push(Tok::Arrow, s, 2); i += 2; continue; }
    if (two('+', '+')) { push(Tok::PlusPlus, s, 2); i += 2; continue; }
    if (two('|', '|')) { push(Tok::BarBar, s, 2); i += 2; continue; }
    switch (c) {
      case '(': push(Tok::LParen, s, 1); break;
      case ')': push(Tok::RParen, s, 1); break;
      case '{': push(Tok::LBrace, s, 1); break;
      case '}': push(Tok::RBrace, s, 1); break;
      case '[': push(Tok::LBracket, s, 1); break;
      case ']': push(Tok::RBracket, s, 1); break;
      case '<': push(Tok::Lt, s, 1); break;
      case '>': push(Tok::Gt, s, 1); break;
      case '=': push(Tok::Eq, s, 1); break;
      case '!': push(Tok::Bang, s, 1); break;
      case '&': push(Tok::Amp, s, 1); break;
      case '|': push(Tok::Bar, s, 1); break;
      case '+': push(Tok::Plus, s, 1); break;
      case '-': push(Tok::Minus, s, 1); break;
      case '*': push(Tok::Star, s, 1); break;
      case '/': push(Tok::Slash, s, 1); break;
      case '^': push(Tok::Caret, s, 1); break;
      case '\'': push(Tok::Prime, s, 1); break;
      case ';': push(Tok::Semi, s, 1); break;
      case ',': push(Tok::Comma, s, 1); break;
      case '?': push(Tok::Question, s, 1); break;
      case '.': push(Tok::Dot, s, 1); break;
      default:
        throw SyntaxError(s, std::string("unexpected character '") + c + "'");
    }
    ++i;
  }
  out.push_back(Token{Tok::End, "", n});
  return out;
}

}  // namespace rddl
