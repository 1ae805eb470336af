#pragma once

#include <memory>
#include <vector>

#include "semq/catalog/table.hpp"

namespace semq::catalog {

// Owning horizontal slice of a pipeline's row stream. row_offset is the
// absolute position of the first row in the originating stream, so results
// can be re-ordered after parallel or phased processing.
struct Chunk {
  std::shared_ptr<const Schema> schema;
  std::vector<std::vector<Value>> columns;
  std::size_t row_offset = 0;

  std::size_t row_count() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t column_count() const { return columns.size(); }

  const Value& cell(std::size_t row, std::size_t col) const { return columns[col][row]; }

  static Chunk empty_like(std::shared_ptr<const Schema> schema, std::size_t row_offset);
  void append_row_from(const Chunk& src, std::size_t row);
};

// Splits [0, table.row_count()) into consecutive chunks of at most
// chunk_size rows; the last chunk may be ragged. Empty tables yield none.
std::vector<Chunk> chunk_scan(const Table& table, std::size_t chunk_size);

// Concatenates chunks (sharing one schema) back into a table.
Table concat_chunks(const std::vector<Chunk>& chunks);

// Re-chunks a materialized row set to a new capacity, renumbering offsets
// from zero.
std::vector<Chunk> rechunk(const std::vector<Chunk>& chunks, std::size_t chunk_size);

}  // namespace semq::catalog
