#pragma once

#include <map>
#include <optional>
#include <string>

#include "semq/catalog/table.hpp"

namespace semq::catalog {

// RFC 4180: quoted fields, doubled-quote escapes, embedded separators and
// line breaks; accepts both \n and \r\n records. The first record is the
// header. Empty fields load as NULL for every column type. A record whose
// field count differs from the header is a ragged-row error (message names
// the 1-based data row).
//
// Column types come from `schema` when given, otherwise each column gets the
// narrowest of {int64, float64, text} that accepts all its non-null fields.
// "nan"/"inf" spellings do not count as numeric. Bool columns exist only via
// an explicit schema and accept true/false (case-insensitive).
Table load_csv(const std::string& path,
               const std::map<std::string, ColumnType>* schema = nullptr);

Table load_csv_text(const std::string& text,
                    const std::map<std::string, ColumnType>* schema = nullptr);

std::string table_to_csv(const Table& table);

}  // namespace semq::catalog
