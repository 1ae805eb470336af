#pragma once

#include <memory>
#include <string>

#include "semq/sql/ast.hpp"

namespace semq::sql {

// Parses one SELECT statement (optionally ';'-terminated). Throws ParseError
// with the offending span.
std::shared_ptr<SelectStmt> parse(const std::string& query);

// Parses a standalone scalar/predicate expression (no statement wrapper).
// Throws ParseError on trailing input or malformed syntax.
ExprPtr parse_predicate_text(const std::string& text);

}  // namespace semq::sql
