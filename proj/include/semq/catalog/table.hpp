#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semq/catalog/value.hpp"

namespace semq::catalog {

// qualifier is the binding table alias; empty for derived columns.
struct ColumnInfo {
  std::string qualifier;
  std::string name;
  ColumnType type = ColumnType::Text;
};

using Schema = std::vector<ColumnInfo>;

// Resolves a possibly qualified column name. Returns the unique matching
// index; nullopt when absent. Throws BindError{ambiguous} when several match.
std::optional<std::size_t> resolve_column(const Schema& schema, const std::string& qualifier,
                                          const std::string& name);

// Immutable after load; columnar (one value vector per column).
class Table {
 public:
  Table() = default;
  explicit Table(Schema schema);

  const Schema& schema() const { return schema_; }
  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }

  const std::vector<Value>& column(std::size_t i) const { return columns_[i]; }
  const Value& cell(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  void append_row(std::vector<Value> row);

  // Replaces every qualifier in the schema (table aliasing at scan time).
  void set_qualifier(const std::string& qualifier);

 private:
  Schema schema_;
  std::vector<std::vector<Value>> columns_;
  std::size_t rows_ = 0;
};

}  // namespace semq::catalog
