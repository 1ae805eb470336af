#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "semq/catalog/table.hpp"

namespace semq::catalog {

struct ColumnStats {
  std::string name;
  ColumnType type = ColumnType::Text;
  bool nullable = false;           // any NULL seen in the sample
  std::size_t distinct_count = 0;  // over non-null sampled values
  // Top-5 most frequent non-null values (rendered), count desc, value asc on
  // ties.
  std::vector<std::pair<std::string, std::size_t>> top_values;
  std::size_t sampled_rows = 0;
};

inline constexpr std::size_t kDefaultStatsSampleRows = 10000;
inline constexpr std::size_t kTopValueCount = 5;

// Stats over the first min(sample_limit, row_count) rows.
ColumnStats column_stats(const Table& table, std::size_t column,
                         std::size_t sample_limit = kDefaultStatsSampleRows);

// One line per the deduction prompt's statistics block, e.g.
//   Translated_Review: nullable=true, distinct=10537,
//   top5=["nan":711, "Good":13, ...]
std::string render_stats(const ColumnStats& stats);

}  // namespace semq::catalog
