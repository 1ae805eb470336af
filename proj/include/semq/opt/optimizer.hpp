#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semq/catalog/catalog.hpp"
#include "semq/catalog/stats.hpp"
#include "semq/llm/gateway.hpp"
#include "semq/sql/plan.hpp"

namespace semq::opt {

struct OptimizerFlags {
  bool compression = true;  // NL-expression compression (1 aux call per semantic node)
  bool deduction = true;    // predicate deduction + verification + pushdown (SemFilters)
  bool rewrites = true;     // rule-based plan rewrites (no LLM calls)
};

struct OptimizerOptions {
  std::string model = "aux-model";  // auxiliary model for optimization calls
  std::size_t stats_sample_rows = catalog::kDefaultStatsSampleRows;
};

// A relational predicate derived from a SemFilter's NL expression. It may be
// applied to the plan only when verified as a necessary condition; the
// original SemFilter stays unless the deduction was marked entire.
struct DeducedPredicate {
  std::string sql_text;         // predicate exactly as the auxiliary LLM wrote it
  bool verified = false;        // passed the necessary-condition check
  bool entire = false;          // response marked the predicate set as equivalent
  bool applied = false;         // inserted into the plan as a RelFilter
  std::string source_template;  // template text of the originating expression
  sql::ExprPtr predicate;       // parsed form (column-vs-literal comparison or LIKE)
};

// One compression attempt; rejected attempts keep the original expression.
struct ExprRewrite {
  std::string before;
  std::string after;      // the auxiliary LLM's answer, even when rejected
  bool accepted = false;
  std::string note;       // rejection reason; empty when accepted
};

struct OptimizerReport {
  std::vector<ExprRewrite> compressions;
  std::vector<DeducedPredicate> predicates;
  std::vector<std::string> notes;  // skipped steps and fallbacks
  std::int64_t aux_calls = 0;      // auxiliary-LLM invocations (cache hits included)
  llm::TokenUsage aux_usage;       // non-cached usage; reconciles with gateway accounting
  double aux_latency_ms = 0.0;     // provider-reported, non-cached calls only

  nlohmann::json to_json() const;
};

// LLM-assisted NL-expression optimization. Every sub-step degrades to
// identity: a malformed auxiliary response never surfaces an error, it only
// leaves the plan unchanged and a note in the report.
class Optimizer {
 public:
  Optimizer(const catalog::Catalog& cat, llm::Gateway& gateway, OptimizerOptions options = {});

  // One auxiliary call. The answer is accepted only when it parses as a
  // template, keeps exactly the original's distinct placeholders in order,
  // and is not longer; otherwise the original is returned unchanged.
  sql::NlExpr compress_expression(const sql::NlExpr& expr, OptimizerReport& report);

  // One auxiliary call with the per-column statistics in context. Candidates
  // that fail to parse, use unsupported grammar, or reference columns absent
  // from `input_schema` are dropped; any response-level failure yields an
  // empty list.
  std::vector<DeducedPredicate> deduce_predicates(const sql::NlExpr& expr,
                                                  const std::vector<catalog::ColumnStats>& stats,
                                                  const catalog::Schema& input_schema,
                                                  OptimizerReport& report);

  // One auxiliary call returning one verdict per candidate. A malformed or
  // wrong-length answer fails closed: every verdict is false. An empty
  // candidate list costs no call and returns an empty list.
  std::vector<bool> verify_necessary(const std::vector<sql::NlExpr>& exprs,
                                     const std::vector<DeducedPredicate>& candidates,
                                     OptimizerReport& report);

  // Full pass over a bound plan: compression for every semantic node, then
  // deduction + verification + pushdown for every SemFilter, then rule-based
  // rewrites. Auxiliary calls per SemFilter ≤ 3; with k SemFilters and m
  // other semantic nodes the total is ≤ 2k + (k + m). With all flags off the
  // plan is returned unchanged and the report is empty.
  std::pair<sql::PlanPtr, OptimizerReport> optimize(const sql::PlanPtr& plan,
                                                    OptimizerFlags flags = {});

 private:
  llm::LlmResponse aux_call(const llm::LlmRequest& request, OptimizerReport& report);
  void compress_pass(const sql::PlanPtr& node, OptimizerReport& report);
  void deduce_pass(sql::PlanPtr& slot, OptimizerReport& report);

  const catalog::Catalog& catalog_;
  llm::Gateway& gateway_;
  OptimizerOptions options_;
};

// Inserts each verified predicate as a RelFilter at the lowest plan position
// where all its columns are available — immediately above the Scan for
// single-table plans, above the covering join side otherwise — starting the
// descent below the predicate's source SemFilter, which stays in place.
// Unverified predicates are ignored; applied ones are flagged. Returns a
// rewritten copy of the plan.
sql::PlanPtr apply_pushdown(const sql::PlanPtr& plan, std::vector<DeducedPredicate>& predicates);

// LLM-free rule rewrites, applied to a copy: SemFilters sink below
// projections and sorts that do not feed them (normalizing mixed
// filter/projection pipelines to filter-first), and relational filters sink
// toward scans, descending into the join side that covers their columns.
sql::PlanPtr standard_rewrites(const sql::PlanPtr& plan);

}  // namespace semq::opt
