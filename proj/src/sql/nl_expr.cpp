#include "semq/sql/nl_expr.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace semq::sql {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Parses the identifier body of a placeholder: ident or ident.ident.
ColumnRef parse_ref(const std::string& body, Span origin) {
  auto fail = [&](const std::string& why) {
    throw ParseError(fmt::format("bad placeholder '{{{}}}': {}", body, why), origin);
  };
  if (body.empty()) fail("empty placeholder");
  auto dot = body.find('.');
  std::string qualifier;
  std::string name = body;
  if (dot != std::string::npos) {
    qualifier = body.substr(0, dot);
    name = body.substr(dot + 1);
    if (qualifier.empty() || name.empty() || name.find('.') != std::string::npos) {
      fail("expected column or alias.column");
    }
  }
  auto valid = [&](const std::string& id) {
    if (id.empty() || !ident_start(id[0])) return false;
    return std::all_of(id.begin(), id.end(), ident_char);
  };
  if (!qualifier.empty() && !valid(qualifier)) fail("invalid qualifier");
  if (!valid(name)) fail("invalid identifier");
  return ColumnRef{std::move(qualifier), std::move(name)};
}

}  // namespace

std::vector<ColumnRef> extract_placeholders(const std::string& template_text, Span origin) {
  std::vector<ColumnRef> refs;
  for (std::size_t i = 0; i < template_text.size(); ++i) {
    char c = template_text[i];
    if (c == '{') {
      if (i + 1 < template_text.size() && template_text[i + 1] == '{') {
        ++i;
        continue;
      }
      auto close = template_text.find('}', i + 1);
      if (close == std::string::npos) {
        throw ParseError("unbalanced '{' in NL template", origin);
      }
      refs.push_back(parse_ref(template_text.substr(i + 1, close - i - 1), origin));
      i = close;
    } else if (c == '}') {
      if (i + 1 < template_text.size() && template_text[i + 1] == '}') {
        ++i;
        continue;
      }
      throw ParseError("unbalanced '}' in NL template", origin);
    }
  }
  return refs;
}

std::vector<ColumnRef> NlExpr::distinct_placeholders() const {
  std::vector<ColumnRef> out;
  for (const auto& ref : placeholders) {
    if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(ref);
  }
  return out;
}

NlExpr make_nl_expr(std::string template_text, Span span) {
  NlExpr expr;
  expr.placeholders = extract_placeholders(template_text, span);
  expr.template_text = std::move(template_text);
  expr.span = span;
  return expr;
}

std::string instantiate_template(const std::string& template_text,
                                 const std::function<std::string(const ColumnRef&)>& resolve) {
  std::string out;
  out.reserve(template_text.size());
  for (std::size_t i = 0; i < template_text.size(); ++i) {
    char c = template_text[i];
    if (c == '{') {
      if (i + 1 < template_text.size() && template_text[i + 1] == '{') {
        out += '{';
        ++i;
        continue;
      }
      auto close = template_text.find('}', i + 1);
      out += resolve(parse_ref(template_text.substr(i + 1, close - i - 1), Span{}));
      i = close;
    } else if (c == '}') {
      out += '}';
      if (i + 1 < template_text.size() && template_text[i + 1] == '}') ++i;
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace semq::sql
