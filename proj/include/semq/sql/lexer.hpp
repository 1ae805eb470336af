#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semq/common.hpp"

namespace semq::sql {

enum class TokenType {
  Ident,       // identifier or keyword (keywords matched case-insensitively)
  Integer,
  Float,
  String,      // '...' with '' doubling undone
  SemLiteral,  // s'...' with '' doubling undone
  Symbol,      // one of ( ) , . * = != <> < <= > >= ;
  End,
};

struct Token {
  TokenType type = TokenType::End;
  std::string text;  // raw identifier / symbol / decoded string body
  std::int64_t int_value = 0;
  double float_value = 0;
  Span span;

  bool is_symbol(const std::string& s) const { return type == TokenType::Symbol && text == s; }
  // Case-insensitive keyword check against an upper-case name.
  bool is_keyword(const std::string& upper) const;
};

std::vector<Token> tokenize(const std::string& text);

}  // namespace semq::sql
