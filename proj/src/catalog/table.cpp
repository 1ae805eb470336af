#include "semq/catalog/table.hpp"

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::catalog {

std::optional<std::size_t> resolve_column(const Schema& schema, const std::string& qualifier,
                                          const std::string& name) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& col = schema[i];
    if (col.name != name) continue;
    if (!qualifier.empty() && col.qualifier != qualifier) continue;
    if (found) {
      throw BindError(fmt::format("ambiguous column reference '{}{}{}'", qualifier,
                                  qualifier.empty() ? "" : ".", name));
    }
    found = i;
  }
  return found;
}

Table::Table(Schema schema) : schema_(std::move(schema)), columns_(schema_.size()) {}

void Table::append_row(std::vector<Value> row) {
  if (row.size() != columns_.size()) {
    throw Error(fmt::format("row width {} does not match schema width {}", row.size(),
                            columns_.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    columns_[i].push_back(std::move(row[i]));
  }
  ++rows_;
}

void Table::set_qualifier(const std::string& qualifier) {
  for (auto& col : schema_) col.qualifier = qualifier;
}

}  // namespace semq::catalog
