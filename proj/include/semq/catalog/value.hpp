#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace semq::catalog {

// TextList is internal only: GroupBy materializes per-group value lists for
// sem_agg through it. It never appears in user-visible schemas.
enum class ColumnType { Int64, Float64, Text, Bool, TextList };

std::string type_name(ColumnType type);
ColumnType type_from_name(const std::string& name);

// monostate encodes NULL.
using Value = std::variant<std::monostate, std::int64_t, double, std::string, bool,
                           std::vector<std::string>>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

// Rendering used for CSV/tablular output, prompt payloads and group keys.
// NULL renders as the empty string.
std::string value_to_string(const Value& v);

// Total order used by OrderBy and GroupBy key sorting: NULL sorts first,
// numeric values compare numerically across Int64/Float64.
// Returns <0, 0, >0.
int compare_values(const Value& a, const Value& b);

}  // namespace semq::catalog
