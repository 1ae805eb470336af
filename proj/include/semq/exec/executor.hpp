#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semq/catalog/catalog.hpp"
#include "semq/catalog/chunk.hpp"
#include "semq/catalog/table.hpp"
#include "semq/exec/context.hpp"
#include "semq/exec/metrics.hpp"
#include "semq/sql/plan.hpp"

namespace semq::exec {

// Pull-based physical operator. next() yields the next chunk or nothing when
// exhausted; schema() is fixed before the first pull.
class Operator {
 public:
  virtual ~Operator() = default;
  virtual const catalog::Schema& schema() const = 0;
  virtual std::optional<catalog::Chunk> next() = 0;
  // Metrics subtree rooted at this operator (children in plan order).
  virtual OperatorMetrics metrics_tree() const = 0;
};

using OperatorPtr = std::unique_ptr<Operator>;

// Lowers a bound logical plan into a physical pipeline. Consecutive semantic
// filters collapse into one vectorized block; fusion (when enabled) pairs
// adjacent compatible semantic operators bottom-up.
OperatorPtr build_pipeline(const sql::PlanPtr& plan, const catalog::Catalog& catalog,
                           ExecContext& ctx);

// Pulls an operator until exhaustion and materializes the output.
catalog::Table drain(Operator& op);

struct ExecResult {
  catalog::Table table;
  OperatorMetrics metrics;
};

ExecResult execute(const sql::PlanPtr& plan, const catalog::Catalog& catalog, ExecContext& ctx);

}  // namespace semq::exec
