#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semq/catalog/chunk.hpp"
#include "semq/exec/context.hpp"
#include "semq/exec/metrics.hpp"
#include "semq/llm/types.hpp"
#include "semq/sql/plan.hpp"

namespace semq::aqe {

// ---------------------------------------------------------------------------
// Adaptive execution of a run of consecutive semantic filters, in three
// phases over disjoint row ranges: (1) expression exploration measures each
// filter independently on a small prefix, (2) path exploration micro-executes
// candidate orderings (with optional fusion and batching) on the next slice
// and keeps the Pareto-optimal survivors, (3) the selected path processes the
// remainder. The final verdict set is the concatenation of the three phases.
// ---------------------------------------------------------------------------

// Matthews correlation coefficient of two verdict vectors; 0 whenever a
// confusion-matrix margin is zero (e.g. a constant vector). Throws ExecError
// on a length mismatch or empty input.
double mcc(const std::vector<bool>& r1, const std::vector<bool>& r2);

// Per-filter statistics from the expression-exploration sample.
struct FilterStats {
  std::size_t sample_rows = 0;
  std::vector<double> selectivity;                // true fraction per filter
  std::vector<std::vector<bool>> result_vectors;  // per filter, one verdict per sample row
  std::vector<std::vector<double>> mcc;           // symmetric pairwise matrix
  exec::OperatorMetrics cost;                     // evaluation accounting
};

// One pipeline step: a single filter, or a pair fused into one call.
struct PathStep {
  std::vector<std::size_t> filters;  // indices into the filter run (2 = fused)
  double est_selectivity = 0.0;

  bool fused() const { return filters.size() == 2; }
};

enum class PathLabel { Reference, Base, FusedVariant };

struct ExecutionPath {
  std::vector<PathStep> steps;
  bool batched = false;
  PathLabel label = PathLabel::Reference;
  std::string name;
  std::optional<std::size_t> unbatched_twin;  // index of the unbatched counterpart
};

// Micro-execution measurements of one candidate on the path-exploration
// sample. Skipped candidates keep evaluated=false and name the pruning rule.
struct PathMetrics {
  bool evaluated = false;
  bool survived = false;
  std::string skip_reason;
  std::vector<bool> selection;  // verdict per sample row
  double accuracy = 0.0;        // vs the unbatched reference selection
  double latency_ms = 0.0;
  llm::TokenUsage usage;
  double monetary_cost = 0.0;
  std::int64_t llm_calls = 0;
};

enum class Objective { LatencyFirst, CostFirst };
enum class AccuracyMetric { F1, PlainAccuracy };

struct AqeConfig {
  double delta1 = 1.0 / 32.0;
  double delta2 = 3.0 / 32.0;
  double mcc_threshold = 0.5;
  double acc_threshold = 0.80;
  Objective objective = Objective::LatencyFirst;
  AccuracyMetric accuracy_metric = AccuracyMetric::F1;
  llm::PricingConfig pricing;

  static AqeConfig from_options(const exec::ExecOptions& options);
};

// Phase 1: evaluates every filter independently per tuple on the whole
// sample (exactly n_filters * n_rows calls) and derives selectivities and the
// pairwise correlation matrix.
FilterStats collect_filter_stats(const std::vector<sql::PlanPtr>& filters,
                                 const std::vector<catalog::Chunk>& sample,
                                 exec::ExecContext& ctx);

// Candidate set: the reference path (user order), the base path (ascending
// selectivity, stable tie-break by original position), one fused variant per
// pair whose correlation exceeds the threshold (fused selectivity = min of
// the pair, path re-sorted), and a batched counterpart of every path. Paths
// with identical step sequences are emitted once; options gate fusion and
// batching.
std::vector<ExecutionPath> generate_paths(const std::vector<sql::PlanPtr>& filters,
                                          const FilterStats& stats, const AqeConfig& cfg,
                                          const exec::ExecOptions& options);

// Evaluates one path over materialized chunks, short-circuiting rows a step
// rejects out of the later steps' calls.
struct PathRun {
  std::vector<bool> selection;
  exec::OperatorMetrics metrics;
};
PathRun run_path(const ExecutionPath& path, const std::vector<sql::PlanPtr>& filters,
                 const std::vector<catalog::Chunk>& chunks, exec::ExecContext& ctx);

// Phase 2: the unbatched reference runs first and defines the proxy ground
// truth; every other candidate runs on the same rows (cache bypassed so the
// repeated prompts are billed honestly). Candidates scoring below the
// accuracy threshold are discarded; a failing batched reference prunes every
// remaining batched path, and a failing fused path prunes its batched twin.
// Returns one entry per path, parallel to `paths`.
std::vector<PathMetrics> explore_paths(const std::vector<ExecutionPath>& paths,
                                       const std::vector<sql::PlanPtr>& filters,
                                       const std::vector<catalog::Chunk>& sample,
                                       const AqeConfig& cfg, exec::ExecContext& ctx);

// Indices of the non-dominated (latency, cost) points: kept iff no other
// point is <= in both coordinates and < in at least one. Ties are kept.
std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& points);

// Minimum latency (or monetary cost) on the frontier; ties break toward
// fewer steps, then the reference path, then input order. Returns the path
// index.
std::size_t select_path(const std::vector<ExecutionPath>& paths,
                        const std::vector<PathMetrics>& metrics,
                        const std::vector<std::size_t>& frontier, Objective objective);

struct PhaseTrace {
  std::size_t rows = 0;
  std::int64_t llm_calls = 0;
  llm::TokenUsage usage;
  double latency_ms = 0.0;
};

struct AqeTrace {
  std::size_t total_rows = 0;
  PhaseTrace phase1, phase2, phase3;
  std::vector<double> selectivity;
  std::vector<std::vector<double>> mcc;
  std::vector<ExecutionPath> paths;
  std::vector<PathMetrics> path_metrics;  // parallel to paths
  std::vector<std::size_t> frontier;      // indices into paths
  std::optional<std::size_t> selected;    // index into paths
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

struct AqeResult {
  std::vector<bool> verdicts;  // one per input row, in input order
  AqeTrace trace;
  exec::OperatorMetrics metrics;  // per-phase accounting tree
};

// Runs the three phases over the materialized input. `filters` are the
// semantic-filter plan nodes in execution order (the user-specified order);
// phase boundaries fall on the first chunk boundaries reaching delta1 and
// delta1+delta2 of the input.
AqeResult run_aqe(const std::vector<sql::PlanPtr>& filters,
                  const std::vector<catalog::Chunk>& input, const AqeConfig& cfg,
                  exec::ExecContext& ctx);

}  // namespace semq::aqe
