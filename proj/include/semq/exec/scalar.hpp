#pragma once

#include <string>

#include "semq/catalog/chunk.hpp"
#include "semq/sql/ast.hpp"
#include "semq/sql/plan.hpp"

namespace semq::exec {

// Evaluates a relational scalar expression against one row. Aggregate and
// semantic atoms must have been hoisted by the planner; hitting one here is
// an execution error.
catalog::Value eval_scalar(const sql::ExprPtr& expr, const catalog::Chunk& chunk,
                           std::size_t row);

// Two-valued predicate semantics: comparisons involving NULL are false, a
// non-Bool result is false. (IS NULL / IS NOT NULL test NULL explicitly.)
bool eval_predicate(const sql::ExprPtr& expr, const catalog::Chunk& chunk, std::size_t row);

// SQL LIKE with % (any run) and _ (any single character); case-sensitive.
bool like_match(const std::string& text, const std::string& pattern);

// Streaming accumulator for one GroupBy aggregate.
class AggAccumulator {
 public:
  explicit AggAccumulator(const sql::AggItem& item) : item_(item) {}

  void add(const catalog::Chunk& chunk, std::size_t row);
  catalog::Value finish() const;

 private:
  const sql::AggItem& item_;
  std::int64_t count_ = 0;
  bool any_ = false;
  bool all_int_ = true;
  std::int64_t int_sum_ = 0;
  double double_sum_ = 0.0;
  catalog::Value best_;  // Min/Max
  std::vector<std::string> collected_;
};

}  // namespace semq::exec
