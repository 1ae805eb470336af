#include "semq/catalog/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "semq/common.hpp"

namespace semq::catalog {

namespace {

struct RawField {
  std::string text;
  bool present = false;  // false only for fully empty fields
};

using RawRecord = std::vector<RawField>;

// Splits CSV text into records. Throws on an unterminated quoted field.
std::vector<RawRecord> split_records(const std::string& text) {
  std::vector<RawRecord> records;
  RawRecord record;
  RawField field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    field.present = !field.text.empty();
    record.push_back(std::move(field));
    field = RawField{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record = RawRecord{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.text += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.text += c;
        field_started = true;
        break;
    }
  }
  if (in_quotes) throw CsvError("unterminated quoted field at end of input");
  if (field_started || !field.text.empty() || !record.empty()) end_record();
  return records;
}

bool is_int64(const std::string& s, std::int64_t* out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return false;
  if (out) *out = value;
  return true;
}

// Strict decimal syntax; rejects "nan", "inf" and other from_chars extras.
bool is_float64(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  if (i != s.size()) return false;
  const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
  double value = 0;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return false;
  if (out) *out = value;
  return true;
}

ColumnType infer_type(const std::vector<RawRecord>& records, std::size_t col) {
  bool can_int = true;
  bool can_float = true;
  bool any_value = false;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& field = records[r][col];
    if (!field.present) continue;
    any_value = true;
    if (can_int && !is_int64(field.text, nullptr)) can_int = false;
    if (can_float && !is_float64(field.text, nullptr)) can_float = false;
    if (!can_int && !can_float) break;
  }
  if (!any_value) return ColumnType::Text;
  if (can_int) return ColumnType::Int64;
  if (can_float) return ColumnType::Float64;
  return ColumnType::Text;
}

Value parse_value(const RawField& field, ColumnType type, std::size_t data_row,
                  const std::string& column) {
  if (!field.present) return std::monostate{};
  switch (type) {
    case ColumnType::Int64: {
      std::int64_t v = 0;
      if (!is_int64(field.text, &v)) {
        throw CsvError(fmt::format("row {}: '{}' is not an int64 for column '{}'", data_row,
                                   field.text, column));
      }
      return v;
    }
    case ColumnType::Float64: {
      double v = 0;
      if (!is_float64(field.text, &v)) {
        throw CsvError(fmt::format("row {}: '{}' is not a float64 for column '{}'", data_row,
                                   field.text, column));
      }
      return v;
    }
    case ColumnType::Bool: {
      std::string lower = field.text;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (lower == "true") return true;
      if (lower == "false") return false;
      throw CsvError(
          fmt::format("row {}: '{}' is not a bool for column '{}'", data_row, field.text, column));
    }
    case ColumnType::Text:
      return field.text;
    case ColumnType::TextList:
      throw CsvError("text_list columns cannot be loaded from CSV");
  }
  return std::monostate{};
}

}  // namespace

Table load_csv_text(const std::string& text, const std::map<std::string, ColumnType>* schema) {
  auto records = split_records(text);
  if (records.empty()) throw CsvError("missing header row");
  const auto& header = records.front();

  std::size_t width = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw CsvError(fmt::format("ragged row {}: {} fields, header has {}", r, records[r].size(),
                                 width));
    }
  }

  Schema table_schema;
  table_schema.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    ColumnInfo info;
    info.name = header[c].text;
    if (info.name.empty()) throw CsvError(fmt::format("empty header name in column {}", c + 1));
    auto it = schema ? schema->find(info.name) : std::map<std::string, ColumnType>::iterator{};
    if (schema && it != schema->end()) {
      info.type = it->second;
    } else {
      info.type = infer_type(records, c);
    }
    table_schema.push_back(std::move(info));
  }

  Table table(table_schema);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Value> row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      row.push_back(parse_value(records[r][c], table_schema[c].type, r, table_schema[c].name));
    }
    table.append_row(std::move(row));
  }
  return table;
}

Table load_csv(const std::string& path, const std::map<std::string, ColumnType>* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(fmt::format("cannot open '{}'", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_csv_text(buffer.str(), schema);
}

namespace {

std::string escape_csv(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string table_to_csv(const Table& table) {
  std::string out;
  const auto& schema = table.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c > 0) out += ',';
    out += escape_csv(schema[c].name);
  }
  out += '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c > 0) out += ',';
      out += escape_csv(value_to_string(table.cell(r, c)));
    }
    out += '\n';
  }
  return out;
}

}  // namespace semq::catalog
