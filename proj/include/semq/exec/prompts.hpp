#pragma once

#include <string>
#include <vector>

#include "semq/catalog/chunk.hpp"
#include "semq/llm/types.hpp"
#include "semq/sql/nl_expr.hpp"

namespace semq::exec {

// A natural-language expression bound to a concrete schema: each distinct
// placeholder resolved to a column index. Rendering a tuple is then a pure
// lookup, and every prompt is guaranteed free of unresolved `{…}`.
struct BoundExpr {
  const sql::NlExpr* expr = nullptr;
  std::vector<sql::ColumnRef> refs;        // distinct placeholders, first-appearance order
  std::vector<std::size_t> column_indexes;  // parallel to refs

  const std::string& template_text() const { return expr->template_text; }
};

BoundExpr bind_expr(const sql::NlExpr& expr, const catalog::Schema& schema);

// Placeholder payloads for one row, in refs order (NULL renders empty).
std::vector<std::string> row_values(const BoundExpr& bound, const catalog::Chunk& chunk,
                                    std::size_t row);

// The template with every placeholder substituted by the row's values.
std::string instantiate(const BoundExpr& bound, const catalog::Chunk& chunk, std::size_t row);

// ---------------------------------------------------------------------------
// Request builders. Prompts are fixed resources (frozen for determinism);
// every builder also attaches the oracle-hint items the mock provider routes
// on. `model` is stamped on the request verbatim.
// ---------------------------------------------------------------------------

llm::LlmRequest filter_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                               std::size_t row, const std::string& model);
llm::LlmRequest batched_filter_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                                       std::size_t begin, std::size_t end,
                                       const std::string& model);

llm::LlmRequest proj_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                             std::size_t row, const std::string& model);
llm::LlmRequest batched_proj_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                                     std::size_t begin, std::size_t end,
                                     const std::string& model);

// Join condition over a concatenated (left ++ right) pair chunk row.
llm::LlmRequest join_request(const BoundExpr& bound, const catalog::Chunk& pair,
                             std::size_t row, std::size_t left_ref_count,
                             const std::string& model);
llm::LlmRequest batched_join_request(const BoundExpr& bound, const catalog::Chunk& pair,
                                     std::size_t begin, std::size_t end,
                                     std::size_t left_ref_count, const std::string& model);

// Pairwise comparison: should row_a precede row_b under the criterion?
llm::LlmRequest order_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                              std::size_t row_a, std::size_t row_b, const std::string& model);

// Aggregation of a value list under the instruction.
llm::LlmRequest agg_request(const sql::NlExpr& expr, const std::vector<std::string>& values,
                            const std::string& model);

// One fused step: a filter or a projection, with placeholders that either
// read the input row or feed on the previous step's output.
struct FusedStepRender {
  bool is_filter = true;
  const BoundExpr* bound = nullptr;
  std::vector<bool> from_prev;  // parallel to bound->refs
};

llm::LlmRequest fused_request(const FusedStepRender& first, const FusedStepRender& second,
                              const catalog::Chunk& chunk, std::size_t row,
                              const std::string& model);
llm::LlmRequest batched_fused_request(const FusedStepRender& first,
                                      const FusedStepRender& second,
                                      const catalog::Chunk& chunk, std::size_t begin,
                                      std::size_t end, const std::string& model);

}  // namespace semq::exec
