#include <insight/dsl/lexer.hpp>

#include <insight/dsl/value.hpp>

#include <cctype>
#include <charconv>

namespace insight::dsl {

std::string_view describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Comma: return "','";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Assign: return "'='";
    case TokenKind::Eq: return "'=='";
    case TokenKind::Ne: return "'!='";
    case TokenKind::Lt: return "'<'";
    case TokenKind::Le: return "'<='";
    case TokenKind::Gt: return "'>'";
    case TokenKind::Ge: return "'>='";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

namespace {

[[noreturn]] void fail(SourcePos pos, const std::string& what) {
  throw EvalError(ErrorKind::ParseError,
                  std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what);
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  SourcePos pos;

  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };
  auto emit = [&](TokenKind kind, std::size_t len, SourcePos at) {
    out.push_back(Token{kind, std::string(src.substr(i, len)), 0.0, at});
    advance(len);
  };

  while (i < src.size()) {
    const char c = src[i];
    const SourcePos at = pos;
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '#') {  // comment to end of line
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      emit(TokenKind::Ident, j - i, at);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      Token t{TokenKind::Number, std::string(src.substr(i, j - i)), 0.0, at};
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc{}) fail(at, "malformed number '" + t.text + "'");
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (c == '"' || c == '\'') {
      const char quote = c;
      std::string value;
      advance();
      bool closed = false;
      while (i < src.size()) {
        const char d = src[i];
        if (d == '\\' && i + 1 < src.size()) {
          const char e = src[i + 1];
          value.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
          advance(2);
          continue;
        }
        if (d == quote) {
          advance();
          closed = true;
          break;
        }
        if (d == '\n') break;
        value.push_back(d);
        advance();
      }
      if (!closed) fail(at, "unterminated string literal");
      out.push_back(Token{TokenKind::String, std::move(value), 0.0, at});
      continue;
    }
    auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
    switch (c) {
      case '(': emit(TokenKind::LParen, 1, at); break;
      case ')': emit(TokenKind::RParen, 1, at); break;
      case '[': emit(TokenKind::LBracket, 1, at); break;
      case ']': emit(TokenKind::RBracket, 1, at); break;
      case '.': emit(TokenKind::Dot, 1, at); break;
      case ',': emit(TokenKind::Comma, 1, at); break;
      case ';': emit(TokenKind::Semicolon, 1, at); break;
      case '+': emit(TokenKind::Plus, 1, at); break;
      case '-': emit(TokenKind::Minus, 1, at); break;
      case '*': emit(TokenKind::Star, 1, at); break;
      case '/': emit(TokenKind::Slash, 1, at); break;
      case '=': two('=') ? emit(TokenKind::Eq, 2, at) : emit(TokenKind::Assign, 1, at); break;
      case '!':
        if (!two('=')) fail(at, "unexpected character '!'");
        emit(TokenKind::Ne, 2, at);
        break;
      case '<': two('=') ? emit(TokenKind::Le, 2, at) : emit(TokenKind::Lt, 1, at); break;
      case '>': two('=') ? emit(TokenKind::Ge, 2, at) : emit(TokenKind::Gt, 1, at); break;
      default: fail(at, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back(Token{TokenKind::End, "", 0.0, pos});
  return out;
}

}  // namespace insight::dsl
