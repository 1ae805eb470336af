#include "semq/sql/lexer.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>

namespace semq::sql {

bool Token::is_keyword(const std::string& upper) const {
  if (type != TokenType::Ident || text.size() != upper.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[i])) != upper[i]) return false;
  }
  return true;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Reads a quoted body starting after the opening quote; '' decodes to '.
std::string read_quoted(const std::string& text, std::size_t& i, Span start) {
  std::string out;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\'') {
      if (i + 1 < text.size() && text[i + 1] == '\'') {
        out += '\'';
        i += 2;
        continue;
      }
      ++i;
      return out;
    }
    out += c;
    ++i;
  }
  throw ParseError("unterminated string literal", start);
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token token;
    token.span.begin = i;

    if ((c == 's' || c == 'S') && i + 1 < text.size() && text[i + 1] == '\'') {
      i += 2;
      token.type = TokenType::SemLiteral;
      token.text = read_quoted(text, i, token.span);
      token.span.end = i;
      tokens.push_back(std::move(token));
      continue;
    }
    if (c == '\'') {
      ++i;
      token.type = TokenType::String;
      token.text = read_quoted(text, i, token.span);
      token.span.end = i;
      tokens.push_back(std::move(token));
      continue;
    }
    if (ident_start(c)) {
      std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) ++i;
      token.type = TokenType::Ident;
      token.text = text.substr(start, i - start);
      token.span.end = i;
      tokens.push_back(std::move(token));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t start = i;
      bool is_float = false;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i < text.size() && text[i] == '.') {
        is_float = true;
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t mark = i;
        ++i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
          is_float = true;
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        } else {
          i = mark;  // 'e' starts an identifier, not an exponent
        }
      }
      std::string body = text.substr(start, i - start);
      token.span.end = i;
      if (is_float) {
        token.type = TokenType::Float;
        token.float_value = std::stod(body);
      } else {
        token.type = TokenType::Integer;
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), token.int_value);
        if (ec != std::errc{} || ptr != body.data() + body.size()) {
          throw ParseError(fmt::format("integer literal '{}' out of range", body), token.span);
        }
      }
      tokens.push_back(std::move(token));
      continue;
    }

    // multi-char symbols first
    auto two = text.substr(i, 2);
    if (two == "!=" || two == "<>" || two == "<=" || two == ">=") {
      token.type = TokenType::Symbol;
      token.text = two == "<>" ? "!=" : two;
      i += 2;
      token.span.end = i;
      tokens.push_back(std::move(token));
      continue;
    }
    static const std::string singles = "(),.*=<>;";
    if (singles.find(c) != std::string::npos) {
      token.type = TokenType::Symbol;
      token.text = std::string(1, c);
      ++i;
      token.span.end = i;
      tokens.push_back(std::move(token));
      continue;
    }
    throw ParseError(fmt::format("unexpected character '{}'", c), Span{i, i + 1});
  }
  Token end;
  end.type = TokenType::End;
  end.span = Span{text.size(), text.size()};
  tokens.push_back(end);
  return tokens;
}

}  // namespace semq::sql
