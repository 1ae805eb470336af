#include "semq/catalog/value.hpp"

#include <fmt/format.h>

#include <cmath>

#include "semq/common.hpp"

namespace semq::catalog {

std::string type_name(ColumnType type) {
  switch (type) {
    case ColumnType::Int64:
      return "int64";
    case ColumnType::Float64:
      return "float64";
    case ColumnType::Text:
      return "text";
    case ColumnType::Bool:
      return "bool";
    case ColumnType::TextList:
      return "text_list";
  }
  return "text";
}

ColumnType type_from_name(const std::string& name) {
  if (name == "int64" || name == "int" || name == "bigint") return ColumnType::Int64;
  if (name == "float64" || name == "double" || name == "float") return ColumnType::Float64;
  if (name == "text" || name == "string" || name == "varchar") return ColumnType::Text;
  if (name == "bool" || name == "boolean") return ColumnType::Bool;
  throw ConfigError(fmt::format("unknown column type '{}'", name));
}

namespace {

std::string float_to_string(double d) {
  if (d == static_cast<std::int64_t>(d) && std::abs(d) < 1e15) {
    return fmt::format("{}.0", static_cast<std::int64_t>(d));
  }
  return fmt::format("{}", d);
}

}  // namespace

std::string value_to_string(const Value& v) {
  switch (v.index()) {
    case 0:
      return "";
    case 1:
      return fmt::format("{}", std::get<std::int64_t>(v));
    case 2:
      return float_to_string(std::get<double>(v));
    case 3:
      return std::get<std::string>(v);
    case 4:
      return std::get<bool>(v) ? "true" : "false";
    case 5: {
      const auto& list = std::get<std::vector<std::string>>(v);
      std::string out = "[";
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i > 0) out += ", ";
        out += list[i];
      }
      return out + "]";
    }
  }
  return "";
}

namespace {

bool numeric(const Value& v) { return v.index() == 1 || v.index() == 2; }

double as_double(const Value& v) {
  return v.index() == 1 ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
}

template <typename T>
int cmp(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

}  // namespace

int compare_values(const Value& a, const Value& b) {
  if (is_null(a) || is_null(b)) {
    if (is_null(a) && is_null(b)) return 0;
    return is_null(a) ? -1 : 1;
  }
  if (numeric(a) && numeric(b)) {
    if (a.index() == 1 && b.index() == 1) {
      return cmp(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
    }
    return cmp(as_double(a), as_double(b));
  }
  if (a.index() != b.index()) return cmp(a.index(), b.index());
  switch (a.index()) {
    case 3:
      return cmp(std::get<std::string>(a), std::get<std::string>(b));
    case 4:
      return cmp<int>(std::get<bool>(a), std::get<bool>(b));
    case 5:
      return cmp(std::get<std::vector<std::string>>(a), std::get<std::vector<std::string>>(b));
  }
  return 0;
}

}  // namespace semq::catalog
