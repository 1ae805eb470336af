#include "semq/catalog/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace semq::catalog {

ColumnStats column_stats(const Table& table, std::size_t column, std::size_t sample_limit) {
  ColumnStats stats;
  stats.name = table.schema()[column].name;
  stats.type = table.schema()[column].type;
  stats.sampled_rows = std::min(sample_limit, table.row_count());

  std::map<std::string, std::size_t> counts;
  for (std::size_t r = 0; r < stats.sampled_rows; ++r) {
    const Value& v = table.cell(r, column);
    if (is_null(v)) {
      stats.nullable = true;
      continue;
    }
    ++counts[value_to_string(v)];
  }
  stats.distinct_count = counts.size();

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > kTopValueCount) ranked.resize(kTopValueCount);
  stats.top_values = std::move(ranked);
  return stats;
}

std::string render_stats(const ColumnStats& stats) {
  std::string tops;
  for (std::size_t i = 0; i < stats.top_values.size(); ++i) {
    if (i > 0) tops += ", ";
    tops += fmt::format("\"{}\":{}", stats.top_values[i].first, stats.top_values[i].second);
  }
  return fmt::format("{}: nullable={}, distinct={}, top5=[{}]", stats.name,
                     stats.nullable ? "true" : "false", stats.distinct_count, tops);
}

}  // namespace semq::catalog
