#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "semq/catalog/catalog.hpp"
#include "semq/catalog/chunk.hpp"
#include "semq/catalog/csv.hpp"
#include "semq/catalog/stats.hpp"
#include "semq/common.hpp"

using namespace semq;
using namespace semq::catalog;

TEST_CASE("csv loads quoted fields with embedded separators and newlines") {
  std::string text =
      "id,comment\n"
      "1,\"hello, world\"\n"
      "2,\"line one\nline two\"\n"
      "3,\"she said \"\"hi\"\"\"\n";
  Table t = load_csv_text(text);
  REQUIRE(t.row_count() == 3);
  CHECK(t.schema()[0].type == ColumnType::Int64);
  CHECK(t.schema()[1].type == ColumnType::Text);
  CHECK(std::get<std::string>(t.cell(0, 1)) == "hello, world");
  CHECK(std::get<std::string>(t.cell(1, 1)) == "line one\nline two");
  CHECK(std::get<std::string>(t.cell(2, 1)) == "she said \"hi\"");
}

TEST_CASE("csv round trips through table_to_csv") {
  std::string text =
      "a,b\n"
      "1,\"x,\"\"y\"\"\nz\"\n"
      "2,plain\n";
  Table t = load_csv_text(text);
  Table again = load_csv_text(table_to_csv(t));
  REQUIRE(again.row_count() == t.row_count());
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    for (std::size_t c = 0; c < t.column_count(); ++c) {
      CHECK(compare_values(t.cell(r, c), again.cell(r, c)) == 0);
    }
  }
}

TEST_CASE("textual nan stays text, never becomes a float") {
  Table t = load_csv_text("review\nnan\ngood\n");
  CHECK(t.schema()[0].type == ColumnType::Text);
  CHECK(std::get<std::string>(t.cell(0, 0)) == "nan");
}

TEST_CASE("numeric-looking text column with one word falls back to text") {
  Table t = load_csv_text("v\n1\n2\nthree\n");
  CHECK(t.schema()[0].type == ColumnType::Text);
}

TEST_CASE("type inference picks the narrowest numeric type") {
  Table t = load_csv_text("i,f,s\n1,1.5,x\n-2,2,y\n3,3e2,z\n");
  CHECK(t.schema()[0].type == ColumnType::Int64);
  CHECK(t.schema()[1].type == ColumnType::Float64);
  CHECK(t.schema()[2].type == ColumnType::Text);
  CHECK(std::get<double>(t.cell(2, 1)) == doctest::Approx(300.0));
}

TEST_CASE("empty fields load as null and do not constrain inference") {
  Table t = load_csv_text("i,s\n1,\n,x\n3,y\n");
  CHECK(t.schema()[0].type == ColumnType::Int64);
  CHECK(is_null(t.cell(0, 1)));
  CHECK(is_null(t.cell(1, 0)));
  CHECK(std::get<std::int64_t>(t.cell(2, 0)) == 3);
}

TEST_CASE("ragged row raises an error naming the data row") {
  CHECK_THROWS_WITH_AS(load_csv_text("a,b\n1,2\n1,2,3\n"),
                       doctest::Contains("ragged row 2"), CsvError);
  CHECK_THROWS_AS(load_csv_text("a,b\n1\n"), CsvError);
}

TEST_CASE("explicit schema overrides inference and validates") {
  std::map<std::string, ColumnType> schema{{"flag", ColumnType::Bool},
                                           {"id", ColumnType::Text}};
  Table t = load_csv_text("id,flag\n1,true\n2,FALSE\n", &schema);
  CHECK(t.schema()[0].type == ColumnType::Text);
  CHECK(t.schema()[1].type == ColumnType::Bool);
  CHECK(std::get<bool>(t.cell(0, 1)) == true);
  CHECK(std::get<bool>(t.cell(1, 1)) == false);
  CHECK_THROWS_AS(load_csv_text("flag\nmaybe\n", &schema), CsvError);
}

TEST_CASE("column stats count frequencies with deterministic tie-break") {
  Table t = load_csv_text("w\nb\na\nb\nc\na\nd\ne\nf\n");
  ColumnStats s = column_stats(t, 0);
  REQUIRE(s.top_values.size() == 5);
  CHECK(s.top_values[0] == std::pair<std::string, std::size_t>{"a", 2});
  CHECK(s.top_values[1] == std::pair<std::string, std::size_t>{"b", 2});
  CHECK(s.top_values[2] == std::pair<std::string, std::size_t>{"c", 1});
  CHECK(s.distinct_count == 6);
  CHECK_FALSE(s.nullable);
}

TEST_CASE("stats sample is a prefix and flags nullability") {
  Table t(Schema{{"", "v", ColumnType::Text}});
  for (int i = 0; i < 50; ++i) t.append_row({std::string("head")});
  t.append_row({std::monostate{}});
  for (int i = 0; i < 50; ++i) t.append_row({std::string("tail")});

  ColumnStats prefix = column_stats(t, 0, 50);
  CHECK(prefix.sampled_rows == 50);
  CHECK(prefix.distinct_count == 1);
  CHECK_FALSE(prefix.nullable);

  ColumnStats full = column_stats(t, 0);
  CHECK(full.nullable);
  CHECK(full.distinct_count == 2);
}

TEST_CASE("stats on an all-null column") {
  Table t(Schema{{"", "v", ColumnType::Text}});
  for (int i = 0; i < 10; ++i) t.append_row({std::monostate{}});
  ColumnStats s = column_stats(t, 0);
  CHECK(s.nullable);
  CHECK(s.distinct_count == 0);
  CHECK(s.top_values.empty());
}

TEST_CASE("stats render matches the deduction prompt shape") {
  Table t(Schema{{"", "Translated_Review", ColumnType::Text}});
  for (int i = 0; i < 711; ++i) t.append_row({std::string("nan")});
  for (int i = 0; i < 13; ++i) t.append_row({std::string("Good")});
  for (int i = 0; i < 10; ++i) t.append_row({std::string("Negative")});
  ColumnStats s = column_stats(t, 0);
  REQUIRE(s.top_values.size() == 3);
  CHECK(s.top_values[0] == std::pair<std::string, std::size_t>{"nan", 711});
  std::string line = render_stats(s);
  CHECK(line ==
        "Translated_Review: nullable=false, distinct=3, "
        "top5=[\"nan\":711, \"Good\":13, \"Negative\":10]");
}

TEST_CASE("chunk_scan splits with a ragged tail") {
  Table t(Schema{{"", "v", ColumnType::Int64}});
  for (std::int64_t i = 0; i < 5; ++i) t.append_row({i});
  auto chunks = chunk_scan(t, 2);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].row_count() == 2);
  CHECK(chunks[1].row_count() == 2);
  CHECK(chunks[2].row_count() == 1);
  CHECK(chunks[0].row_offset == 0);
  CHECK(chunks[1].row_offset == 2);
  CHECK(chunks[2].row_offset == 4);
}

TEST_CASE("chunk_scan covers the adaptive case-study shape") {
  Table t(Schema{{"", "v", ColumnType::Int64}});
  for (std::int64_t i = 0; i < 864; ++i) t.append_row({i});
  auto chunks = chunk_scan(t, 27);
  CHECK(chunks.size() == 32);
  for (const auto& chunk : chunks) CHECK(chunk.row_count() == 27);
}

TEST_CASE("chunk_scan of an empty table yields no chunks") {
  Table t(Schema{{"", "v", ColumnType::Int64}});
  CHECK(chunk_scan(t, 16).empty());
}

TEST_CASE("chunk partition property: concatenation restores the table") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 30; ++round) {
    std::size_t rows = rng() % 200;
    Table t(Schema{{"", "a", ColumnType::Int64}, {"", "b", ColumnType::Text}});
    for (std::size_t i = 0; i < rows; ++i) {
      t.append_row({static_cast<std::int64_t>(rng() % 1000),
                    std::string(1, static_cast<char>('a' + rng() % 26))});
    }
    std::size_t cap = 1 + rng() % 64;
    auto chunks = chunk_scan(t, cap);

    std::size_t total = 0;
    std::size_t expected_offset = 0;
    for (const auto& chunk : chunks) {
      CHECK(chunk.row_offset == expected_offset);
      CHECK(chunk.row_count() > 0);
      CHECK(chunk.row_count() <= cap);
      expected_offset += chunk.row_count();
      total += chunk.row_count();
    }
    REQUIRE(total == rows);

    Table back = concat_chunks(chunks);
    if (rows == 0) {
      CHECK(back.row_count() == 0);
      continue;
    }
    REQUIRE(back.row_count() == rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < t.column_count(); ++c) {
        CHECK(compare_values(back.cell(r, c), t.cell(r, c)) == 0);
      }
    }
  }
}

TEST_CASE("stats agree with a brute-force recount") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    Table t(Schema{{"", "v", ColumnType::Text}});
    std::size_t rows = 1 + rng() % 400;
    for (std::size_t i = 0; i < rows; ++i) {
      if (rng() % 7 == 0) {
        t.append_row({std::monostate{}});
      } else {
        t.append_row({std::string(1, static_cast<char>('a' + rng() % 5))});
      }
    }
    ColumnStats s = column_stats(t, 0);

    std::map<std::string, std::size_t> counts;
    bool any_null = false;
    for (std::size_t r = 0; r < rows; ++r) {
      if (is_null(t.cell(r, 0))) {
        any_null = true;
      } else {
        ++counts[std::get<std::string>(t.cell(r, 0))];
      }
    }
    CHECK(s.nullable == any_null);
    CHECK(s.distinct_count == counts.size());
    for (const auto& [value, count] : s.top_values) CHECK(counts.at(value) == count);
    // top list is sorted by count desc then value asc
    for (std::size_t i = 1; i < s.top_values.size(); ++i) {
      bool ordered = s.top_values[i - 1].second > s.top_values[i].second ||
                     (s.top_values[i - 1].second == s.top_values[i].second &&
                      s.top_values[i - 1].first < s.top_values[i].first);
      CHECK(ordered);
    }
  }
}

TEST_CASE("value comparison orders nulls first and numerics cross-type") {
  CHECK(compare_values(std::monostate{}, std::int64_t{0}) < 0);
  CHECK(compare_values(std::int64_t{2}, 2.0) == 0);
  CHECK(compare_values(std::int64_t{2}, 2.5) < 0);
  CHECK(compare_values(std::string("a"), std::string("b")) < 0);
}

TEST_CASE("catalog rejects unknown tables") {
  Catalog c;
  Table t(Schema{{"", "v", ColumnType::Int64}});
  c.register_table("t", std::move(t));
  CHECK(c.has_table("t"));
  CHECK_THROWS_AS(c.table("missing"), ConfigError);
}
