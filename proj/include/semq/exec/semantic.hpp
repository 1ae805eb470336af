#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semq/catalog/chunk.hpp"
#include "semq/exec/context.hpp"
#include "semq/exec/metrics.hpp"
#include "semq/exec/prompts.hpp"
#include "semq/sql/plan.hpp"

namespace semq::exec {

// ---------------------------------------------------------------------------
// Reference semantic operators. Call counts follow the reference algorithms:
// filters and projections are linear in the chunk, joins quadratic in the
// pair count, order-by runs a pairwise selection sort, and aggregation packs
// values into context-budget groups hierarchically.
// ---------------------------------------------------------------------------

struct FilterResult {
  std::vector<bool> verdicts;  // one per chunk row
  OperatorMetrics metrics;
};
// Batched mode issues ⌈rows/batch⌉ array calls; a batch whose array fails to
// parse (or misses the length) is transparently re-evaluated per tuple and
// counted in metrics.fallback_batches.
FilterResult eval_sem_filter(const catalog::Chunk& chunk, const sql::NlExpr& expr,
                             CallMode mode, ExecContext& ctx);

struct ProjResult {
  std::vector<std::string> values;  // one per chunk row
  OperatorMetrics metrics;
};
ProjResult eval_sem_proj(const catalog::Chunk& chunk, const sql::NlExpr& expr, CallMode mode,
                         ExecContext& ctx);

struct JoinResult {
  catalog::Table rows;
  OperatorMetrics metrics;
};
// Nested-loop evaluation of all |left|·|right| pairs; pairs failing the
// optional relational pre-filter are rejected without a model call. Semi
// joins emit each left row at most once and short-circuit per tuple.
JoinResult eval_sem_join(const catalog::Table& left, const catalog::Table& right,
                         const sql::NlExpr& expr, const sql::ExprPtr& rel_predicate, bool semi,
                         const catalog::Schema& output_schema, CallMode mode, ExecContext& ctx);

struct OrderResult {
  std::vector<std::size_t> permutation;  // output position -> input row
  OperatorMetrics metrics;
};
// Selection sort with the model as pairwise comparator: exactly n(n-1)/2
// comparisons; an inconsistent comparator still yields a permutation.
OrderResult eval_sem_orderby(const catalog::Table& rows, const sql::NlExpr& expr,
                             ExecContext& ctx);

struct AggResult {
  std::string text;
  OperatorMetrics metrics;
};
// One call when everything fits the context budget; otherwise greedy
// budget-fitting groups aggregated level by level until one summary remains.
// A single value exceeding the budget on its own is an error naming the row.
AggResult eval_sem_agg(const std::vector<std::string>& values, const sql::NlExpr& expr,
                       std::size_t context_budget, ExecContext& ctx);

// ---------------------------------------------------------------------------
// Operator fusion (pairs only). `first` executes before `second` in the
// pipeline; filter-first patterns require a shared column, projection-first
// patterns require the second expression to consume the first's alias.
// ---------------------------------------------------------------------------

struct FusedStep {
  bool is_filter = true;
  sql::NlExpr expr;
  std::string alias;  // projection output column
};

struct FusedPair {
  FusedStep first;
  FusedStep second;
  std::vector<bool> second_from_prev;  // per distinct ref of second.expr
  std::string pattern;                 // e.g. "filter+filter"
  std::optional<double> est_selectivity;

  std::string label() const;
};

// a is the upstream (executed-first) node, b its parent. Returns the fused
// pair when one of the supported two-operator patterns applies, nothing
// otherwise.
std::optional<FusedPair> fuse(const sql::PlanNode& a, const sql::PlanNode& b);

struct FusedResult {
  std::vector<bool> mask;                 // row survives (all-true for proj+proj)
  std::vector<std::string> first_values;  // projection outputs ("" for dropped rows)
  std::vector<std::string> second_values;
  OperatorMetrics metrics;
};
// One call per input row evaluating both steps; filter-first responses
// short-circuit the second step for rows the first rejects.
FusedResult eval_fused(const catalog::Chunk& chunk, const FusedPair& pair, CallMode mode,
                       ExecContext& ctx);

}  // namespace semq::exec
