#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semq/common.hpp"

namespace semq::sql {

// Possibly qualified column reference; empty qualifier means unqualified.
struct ColumnRef {
  std::string qualifier;
  std::string name;

  bool operator==(const ColumnRef&) const = default;
  std::string display() const { return qualifier.empty() ? name : qualifier + "." + name; }
};

// A natural-language expression literal: the template text between the
// quotes of s'...' (quote doubling already undone), with {column} or
// {alias.column} placeholders. "{{" and "}}" escape literal braces.
struct NlExpr {
  std::string template_text;
  std::vector<ColumnRef> placeholders;  // in order of appearance, duplicates kept
  Span span;

  std::vector<ColumnRef> distinct_placeholders() const;
  std::string display() const { return "s'" + template_text + "'"; }
};

// Parses the placeholders out of a template. Throws ParseError on unbalanced
// braces, an empty "{}", or a malformed identifier.
std::vector<ColumnRef> extract_placeholders(const std::string& template_text,
                                            Span origin = Span{});

// Builds an NlExpr, validating the template.
NlExpr make_nl_expr(std::string template_text, Span span = Span{});

// Replaces each placeholder with resolve(ref); "{{"/"}}" become literal
// braces. resolve sees placeholders in order of appearance.
std::string instantiate_template(const std::string& template_text,
                                 const std::function<std::string(const ColumnRef&)>& resolve);

}  // namespace semq::sql
