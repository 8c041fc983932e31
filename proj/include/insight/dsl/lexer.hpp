#pragma once

#include <insight/dsl/ast.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace insight::dsl {

enum class TokenKind {
  Ident, Number, String,
  LParen, RParen, LBracket, RBracket,
  Dot, Comma, Semicolon, Assign,
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash,
  End,
};

struct Token {
  TokenKind kind;
  std::string text;  // identifier name, unescaped string, or number spelling
  double number = 0.0;
  SourcePos pos;
};

/// Splits source into tokens. Throws EvalError(ParseError) on stray
/// characters or unterminated strings.
std::vector<Token> tokenize(std::string_view source);

std::string_view describe(TokenKind kind);

}  // namespace insight::dsl
