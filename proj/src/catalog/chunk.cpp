#include "semq/catalog/chunk.hpp"

#include "semq/common.hpp"

namespace semq::catalog {

Chunk Chunk::empty_like(std::shared_ptr<const Schema> schema, std::size_t row_offset) {
  Chunk out;
  out.columns.resize(schema->size());
  out.schema = std::move(schema);
  out.row_offset = row_offset;
  return out;
}

void Chunk::append_row_from(const Chunk& src, std::size_t row) {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    columns[c].push_back(src.columns[c][row]);
  }
}

std::vector<Chunk> chunk_scan(const Table& table, std::size_t chunk_size) {
  if (chunk_size == 0) throw ConfigError("chunk size must be positive");
  std::vector<Chunk> out;
  auto schema = std::make_shared<const Schema>(table.schema());
  for (std::size_t start = 0; start < table.row_count(); start += chunk_size) {
    std::size_t len = std::min(chunk_size, table.row_count() - start);
    Chunk chunk = Chunk::empty_like(schema, start);
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      auto& col = chunk.columns[c];
      col.reserve(len);
      for (std::size_t r = start; r < start + len; ++r) col.push_back(table.cell(r, c));
    }
    out.push_back(std::move(chunk));
  }
  return out;
}

Table concat_chunks(const std::vector<Chunk>& chunks) {
  if (chunks.empty()) return Table{};
  Table out(*chunks.front().schema);
  for (const auto& chunk : chunks) {
    for (std::size_t r = 0; r < chunk.row_count(); ++r) {
      std::vector<Value> row;
      row.reserve(chunk.column_count());
      for (std::size_t c = 0; c < chunk.column_count(); ++c) row.push_back(chunk.cell(r, c));
      out.append_row(std::move(row));
    }
  }
  return out;
}

std::vector<Chunk> rechunk(const std::vector<Chunk>& chunks, std::size_t chunk_size) {
  return chunk_scan(concat_chunks(chunks), chunk_size);
}

}  // namespace semq::catalog
