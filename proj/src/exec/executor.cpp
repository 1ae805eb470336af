#include "semq/exec/executor.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "semq/aqe/aqe.hpp"
#include "semq/common.hpp"
#include "semq/exec/scalar.hpp"
#include "semq/exec/semantic.hpp"

namespace semq::exec {

using catalog::Chunk;
using catalog::Schema;
using catalog::Table;
using catalog::Value;
using sql::PlanKind;
using sql::PlanNode;
using sql::PlanPtr;

namespace {

std::shared_ptr<const Schema> share(const Schema& schema) {
  return std::make_shared<const Schema>(schema);
}

// Accumulates wall time spent inside next() (input pulls included).
class WallAccumulator {
 public:
  explicit WallAccumulator(double& sink) : sink_(sink) {}
  ~WallAccumulator() {
    sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
                 .count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::size_t resolve_or_throw(const Schema& schema, const sql::ColumnRef& ref) {
  auto index = catalog::resolve_column(schema, ref.qualifier, ref.name);
  if (!index) throw ExecError(fmt::format("unresolved column '{}'", ref.display()));
  return *index;
}

// Lexicographic total order over value vectors (hash-join/group keys).
struct VectorLess {
  bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      int c = catalog::compare_values(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  }
};

Chunk table_as_chunk(const Table& table) {
  Chunk chunk;
  chunk.schema = std::make_shared<Schema>(table.schema());
  chunk.columns.resize(table.column_count());
  for (std::size_t c = 0; c < table.column_count(); ++c) chunk.columns[c] = table.column(c);
  return chunk;
}

// ---------------------------------------------------------------------------
// Relational operators
// ---------------------------------------------------------------------------

class ScanOp final : public Operator {
 public:
  ScanOp(const PlanNode& node, const catalog::Catalog& catalog, const ExecOptions& options)
      : schema_(node.schema),
        shared_(share(node.schema)),
        table_(&catalog.table(node.table_name)),
        capacity_(std::max<std::size_t>(1, options.chunk_capacity)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (cursor_ >= table_->row_count()) return std::nullopt;
    std::size_t end = std::min(table_->row_count(), cursor_ + capacity_);
    Chunk chunk;
    chunk.schema = shared_;
    chunk.row_offset = cursor_;
    chunk.columns.resize(table_->column_count());
    for (std::size_t c = 0; c < table_->column_count(); ++c) {
      const auto& column = table_->column(c);
      chunk.columns[c].assign(column.begin() + static_cast<std::ptrdiff_t>(cursor_),
                              column.begin() + static_cast<std::ptrdiff_t>(end));
    }
    metrics_.rows_out += static_cast<std::int64_t>(end - cursor_);
    cursor_ = end;
    return chunk;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.rows_in = static_cast<std::int64_t>(table_->row_count());
    return tree;
  }

 private:
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  const Table* table_;
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  OperatorMetrics metrics_;
};

class RelFilterOp final : public Operator {
 public:
  RelFilterOp(const PlanNode& node, OperatorPtr child)
      : child_(std::move(child)),
        predicate_(node.rel_predicate),
        schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    while (auto chunk = child_->next()) {
      metrics_.rows_in += static_cast<std::int64_t>(chunk->row_count());
      Chunk out = Chunk::empty_like(shared_, rows_emitted_);
      for (std::size_t row = 0; row < chunk->row_count(); ++row) {
        if (eval_predicate(predicate_, *chunk, row)) out.append_row_from(*chunk, row);
      }
      if (out.row_count() == 0) continue;
      metrics_.rows_out += static_cast<std::int64_t>(out.row_count());
      rows_emitted_ += out.row_count();
      return out;
    }
    return std::nullopt;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  sql::ExprPtr predicate_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t rows_emitted_ = 0;
  OperatorMetrics metrics_;
};

class RelProjectOp final : public Operator {
 public:
  RelProjectOp(const PlanNode& node, OperatorPtr child)
      : child_(std::move(child)),
        projections_(node.projections),
        schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    auto chunk = child_->next();
    if (!chunk) return std::nullopt;
    metrics_.rows_in += static_cast<std::int64_t>(chunk->row_count());
    Chunk out;
    out.schema = shared_;
    out.row_offset = chunk->row_offset;
    out.columns.resize(projections_.size());
    for (std::size_t j = 0; j < projections_.size(); ++j) {
      out.columns[j].reserve(chunk->row_count());
      for (std::size_t row = 0; row < chunk->row_count(); ++row)
        out.columns[j].push_back(eval_scalar(projections_[j].expr, *chunk, row));
    }
    metrics_.rows_out += static_cast<std::int64_t>(out.row_count());
    return out;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  std::vector<sql::ProjectItem> projections_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  OperatorMetrics metrics_;
};

// Emits a materialized row set as capacity-sized chunks.
class ChunkEmitter {
 public:
  void reset(const Table& table, std::shared_ptr<const Schema> schema, std::size_t capacity) {
    chunks_ = catalog::chunk_scan(table, std::max<std::size_t>(1, capacity));
    for (auto& chunk : chunks_) chunk.schema = schema;
    cursor_ = 0;
  }

  std::optional<Chunk> next() {
    if (cursor_ >= chunks_.size()) return std::nullopt;
    return std::move(chunks_[cursor_++]);
  }

 private:
  std::vector<Chunk> chunks_;
  std::size_t cursor_ = 0;
};

class HashJoinOp final : public Operator {
 public:
  HashJoinOp(const PlanNode& node, OperatorPtr left, OperatorPtr right,
             const ExecOptions& options)
      : left_(std::move(left)),
        right_(std::move(right)),
        keys_(node.join_keys),
        semi_(node.semi),
        schema_(node.schema),
        shared_(share(node.schema)),
        capacity_(options.chunk_capacity) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (!built_) {
      build();
      built_ = true;
    }
    return emitter_.next();
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(left_->metrics_tree());
    tree.children.push_back(right_->metrics_tree());
    return tree;
  }

 private:
  void build() {
    Table left = drain(*left_);
    Table right = drain(*right_);
    metrics_.rows_in = static_cast<std::int64_t>(left.row_count() + right.row_count());
    std::vector<std::size_t> left_keys;
    std::vector<std::size_t> right_keys;
    for (const auto& [l, r] : keys_) {
      left_keys.push_back(resolve_or_throw(left.schema(), l));
      right_keys.push_back(resolve_or_throw(right.schema(), r));
    }
    // NULL keys never match (SQL equality semantics).
    std::map<std::vector<Value>, std::vector<std::size_t>, VectorLess> index;
    for (std::size_t r = 0; r < right.row_count(); ++r) {
      std::vector<Value> key;
      bool null_key = false;
      for (std::size_t k : right_keys) {
        const Value& v = right.cell(r, k);
        null_key = null_key || catalog::is_null(v);
        key.push_back(v);
      }
      if (!null_key) index[std::move(key)].push_back(r);
    }
    Table out(schema_);
    for (std::size_t l = 0; l < left.row_count(); ++l) {
      std::vector<Value> key;
      bool null_key = false;
      for (std::size_t k : left_keys) {
        const Value& v = left.cell(l, k);
        null_key = null_key || catalog::is_null(v);
        key.push_back(v);
      }
      if (null_key) continue;
      auto it = index.find(key);
      if (it == index.end()) continue;
      if (semi_) {
        std::vector<Value> row;
        for (std::size_t c = 0; c < left.column_count(); ++c) row.push_back(left.cell(l, c));
        out.append_row(std::move(row));
      } else {
        for (std::size_t r : it->second) {
          std::vector<Value> row;
          for (std::size_t c = 0; c < left.column_count(); ++c) row.push_back(left.cell(l, c));
          for (std::size_t c = 0; c < right.column_count(); ++c) row.push_back(right.cell(r, c));
          out.append_row(std::move(row));
        }
      }
    }
    metrics_.rows_out = static_cast<std::int64_t>(out.row_count());
    emitter_.reset(out, shared_, capacity_);
  }

  OperatorPtr left_;
  OperatorPtr right_;
  std::vector<std::pair<sql::ColumnRef, sql::ColumnRef>> keys_;
  bool semi_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t capacity_;
  bool built_ = false;
  ChunkEmitter emitter_;
  OperatorMetrics metrics_;
};

class GroupByOp final : public Operator {
 public:
  GroupByOp(const PlanNode& node, OperatorPtr child, const ExecOptions& options)
      : child_(std::move(child)),
        keys_(node.group_keys),
        aggregates_(node.aggregates),
        schema_(node.schema),
        shared_(share(node.schema)),
        capacity_(options.chunk_capacity) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (!built_) {
      build();
      built_ = true;
    }
    return emitter_.next();
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  void build() {
    Table input = drain(*child_);
    metrics_.rows_in = static_cast<std::int64_t>(input.row_count());
    Chunk view = table_as_chunk(input);
    std::vector<std::size_t> key_indexes;
    for (const auto& key : keys_) key_indexes.push_back(resolve_or_throw(input.schema(), key));

    // Groups ordered by key for deterministic output. An empty key list forms
    // one global group even over zero input rows.
    std::map<std::vector<Value>, std::vector<std::size_t>, VectorLess> groups;
    if (keys_.empty()) groups[{}] = {};
    for (std::size_t row = 0; row < input.row_count(); ++row) {
      std::vector<Value> key;
      for (std::size_t k : key_indexes) key.push_back(input.cell(row, k));
      groups[std::move(key)].push_back(row);
    }

    Table out(schema_);
    for (const auto& [key, rows] : groups) {
      std::vector<Value> out_row = key;
      for (const auto& item : aggregates_) {
        AggAccumulator acc(item);
        for (std::size_t row : rows) acc.add(view, row);
        out_row.push_back(acc.finish());
      }
      out.append_row(std::move(out_row));
    }
    metrics_.rows_out = static_cast<std::int64_t>(out.row_count());
    emitter_.reset(out, shared_, capacity_);
  }

  OperatorPtr child_;
  std::vector<sql::ColumnRef> keys_;
  std::vector<sql::AggItem> aggregates_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t capacity_;
  bool built_ = false;
  ChunkEmitter emitter_;
  OperatorMetrics metrics_;
};

class OrderByOp final : public Operator {
 public:
  OrderByOp(const PlanNode& node, OperatorPtr child, const ExecOptions& options)
      : child_(std::move(child)),
        keys_(node.order_keys),
        schema_(node.schema),
        shared_(share(node.schema)),
        capacity_(options.chunk_capacity) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (!built_) {
      build();
      built_ = true;
    }
    return emitter_.next();
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  void build() {
    Table input = drain(*child_);
    metrics_.rows_in = static_cast<std::int64_t>(input.row_count());
    Chunk view = table_as_chunk(input);
    // Precompute key values; stable sort keeps input order on ties.
    std::vector<std::vector<Value>> key_values(input.row_count());
    for (std::size_t row = 0; row < input.row_count(); ++row) {
      for (const auto& key : keys_) key_values[row].push_back(eval_scalar(key.expr, view, row));
    }
    std::vector<std::size_t> order(input.row_count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (std::size_t k = 0; k < keys_.size(); ++k) {
        int c = catalog::compare_values(key_values[a][k], key_values[b][k]);
        if (c != 0) return keys_[k].ascending ? c < 0 : c > 0;
      }
      return false;
    });
    Table out(schema_);
    for (std::size_t row : order) {
      std::vector<Value> values;
      for (std::size_t c = 0; c < input.column_count(); ++c) values.push_back(input.cell(row, c));
      out.append_row(std::move(values));
    }
    metrics_.rows_out = static_cast<std::int64_t>(out.row_count());
    emitter_.reset(out, shared_, capacity_);
  }

  OperatorPtr child_;
  std::vector<sql::OrderKey> keys_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t capacity_;
  bool built_ = false;
  ChunkEmitter emitter_;
  OperatorMetrics metrics_;
};

class LimitOp final : public Operator {
 public:
  LimitOp(const PlanNode& node, OperatorPtr child)
      : child_(std::move(child)), remaining_(node.limit), schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (remaining_ == 0) return std::nullopt;
    auto chunk = child_->next();
    if (!chunk) return std::nullopt;
    metrics_.rows_in += static_cast<std::int64_t>(chunk->row_count());
    if (chunk->row_count() > remaining_) {
      Chunk truncated = Chunk::empty_like(shared_, chunk->row_offset);
      for (std::size_t row = 0; row < remaining_; ++row) truncated.append_row_from(*chunk, row);
      chunk = std::move(truncated);
    }
    remaining_ -= chunk->row_count();
    metrics_.rows_out += static_cast<std::int64_t>(chunk->row_count());
    return chunk;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  std::size_t remaining_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  OperatorMetrics metrics_;
};

// ---------------------------------------------------------------------------
// Semantic operators
// ---------------------------------------------------------------------------

// Maximal run of consecutive semantic filters, vectorized over each chunk:
// every filter (or fused filter pair) evaluates all chunk rows and the masks
// are ANDed, so batches stay full and no filter depends on another's verdict.
class SemFilterBlockOp final : public Operator {
 public:
  // `chain` is in execution order (deepest plan node first).
  SemFilterBlockOp(const std::vector<const PlanNode*>& chain, OperatorPtr child,
                   ExecContext& ctx)
      : child_(std::move(child)),
        ctx_(ctx),
        schema_(chain.back()->schema),
        shared_(share(schema_)) {
    if (ctx_.options.fusion) {
      std::size_t i = 0;
      while (i < chain.size()) {
        if (i + 1 < chain.size()) {
          if (auto pair = fuse(*chain[i], *chain[i + 1])) {
            units_.push_back(Unit{std::nullopt, std::move(pair)});
            i += 2;
            continue;
          }
        }
        units_.push_back(Unit{*chain[i]->expr, std::nullopt});
        ++i;
      }
    } else {
      for (const PlanNode* node : chain) units_.push_back(Unit{*node->expr, std::nullopt});
    }
    unit_metrics_.resize(units_.size());
    for (std::size_t u = 0; u < units_.size(); ++u) {
      unit_metrics_[u].label = units_[u].pair ? units_[u].pair->label()
                                              : fmt::format("SemFilter {}", units_[u].expr->display());
    }
    metrics_.label =
        units_.size() == 1 ? unit_metrics_[0].label : fmt::format("SemFilterBlock[{}]", units_.size());
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    while (auto chunk = child_->next()) {
      metrics_.rows_in += static_cast<std::int64_t>(chunk->row_count());
      std::vector<bool> mask(chunk->row_count(), true);
      CallMode mode = CallMode::from_options(ctx_.options);
      for (std::size_t u = 0; u < units_.size(); ++u) {
        if (units_[u].pair) {
          FusedResult r = eval_fused(*chunk, *units_[u].pair, mode, ctx_);
          for (std::size_t row = 0; row < mask.size(); ++row)
            mask[row] = mask[row] && r.mask[row];
          unit_metrics_[u].merge_counts(r.metrics);
        } else {
          FilterResult r = eval_sem_filter(*chunk, *units_[u].expr, mode, ctx_);
          for (std::size_t row = 0; row < mask.size(); ++row)
            mask[row] = mask[row] && r.verdicts[row];
          unit_metrics_[u].merge_counts(r.metrics);
        }
      }
      Chunk out = Chunk::empty_like(shared_, rows_emitted_);
      for (std::size_t row = 0; row < chunk->row_count(); ++row)
        if (mask[row]) out.append_row_from(*chunk, row);
      if (out.row_count() == 0) continue;
      rows_emitted_ += out.row_count();
      metrics_.rows_out += static_cast<std::int64_t>(out.row_count());
      return out;
    }
    return std::nullopt;
  }

  OperatorMetrics metrics_tree() const override {
    if (units_.size() == 1) {
      OperatorMetrics tree = unit_metrics_[0];
      tree.wall_ms = metrics_.wall_ms;
      tree.rows_in = metrics_.rows_in;
      tree.rows_out = metrics_.rows_out;
      tree.children.push_back(child_->metrics_tree());
      return tree;
    }
    OperatorMetrics tree = metrics_;
    for (const auto& unit : unit_metrics_) {
      tree.llm_calls += unit.llm_calls;
      tree.usage += unit.usage;
      tree.latency_ms += unit.latency_ms;
      tree.fallback_batches += unit.fallback_batches;
      tree.children.push_back(unit);
    }
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  struct Unit {
    std::optional<sql::NlExpr> expr;    // single filter
    std::optional<FusedPair> pair;      // fused filter pair
  };

  OperatorPtr child_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::vector<Unit> units_;
  std::vector<OperatorMetrics> unit_metrics_;
  std::size_t rows_emitted_ = 0;
  OperatorMetrics metrics_;
};

// Adaptive execution of a consecutive semantic-filter run: buffers the whole
// input, then samples it to measure per-filter selectivity and correlation,
// micro-executes candidate orderings, and runs the Pareto-selected path on the
// remainder. Verdict semantics match the static block (conjunction of all
// filters), but candidate paths short-circuit between steps, so call counts
// depend on the chosen ordering.
class AdaptiveFilterOp final : public Operator {
 public:
  AdaptiveFilterOp(const std::vector<const PlanNode*>& chain, OperatorPtr child,
                   ExecContext& ctx)
      : child_(std::move(child)),
        ctx_(ctx),
        schema_(chain.back()->schema),
        shared_(share(schema_)) {
    filters_.reserve(chain.size());
    for (const PlanNode* node : chain)
      filters_.push_back(std::make_shared<PlanNode>(*node));
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(wall_ms_);
    if (!ran_) {
      while (auto chunk = child_->next()) buffered_.push_back(std::move(*chunk));
      result_ = aqe::run_aqe(filters_, buffered_, aqe::AqeConfig::from_options(ctx_.options),
                             ctx_);
      if (ctx_.aqe_traces) ctx_.aqe_traces->push_back(result_.trace.to_json());
      ran_ = true;
    }
    std::size_t offset = 0;
    for (std::size_t c = 0; c < cursor_; ++c) offset += buffered_[c].row_count();
    while (cursor_ < buffered_.size()) {
      const Chunk& chunk = buffered_[cursor_];
      Chunk out = Chunk::empty_like(shared_, rows_emitted_);
      for (std::size_t row = 0; row < chunk.row_count(); ++row)
        if (result_.verdicts[offset + row]) out.append_row_from(chunk, row);
      offset += chunk.row_count();
      ++cursor_;
      if (out.row_count() == 0) continue;
      rows_emitted_ += out.row_count();
      return out;
    }
    return std::nullopt;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = result_.metrics;
    for (const auto& phase : tree.children) {
      tree.llm_calls += phase.llm_calls;
      tree.usage += phase.usage;
      tree.latency_ms += phase.latency_ms;
      tree.fallback_batches += phase.fallback_batches;
    }
    tree.wall_ms = wall_ms_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::vector<sql::PlanPtr> filters_;  // execution order (deepest plan node first)
  std::vector<Chunk> buffered_;
  aqe::AqeResult result_;
  bool ran_ = false;
  std::size_t cursor_ = 0;
  std::size_t rows_emitted_ = 0;
  double wall_ms_ = 0.0;
};

class SemProjOp final : public Operator {
 public:
  SemProjOp(const PlanNode& node, OperatorPtr child, ExecContext& ctx)
      : child_(std::move(child)), expr_(*node.expr), ctx_(ctx), schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    auto chunk = child_->next();
    if (!chunk) return std::nullopt;
    ProjResult r = eval_sem_proj(*chunk, expr_, CallMode::from_options(ctx_.options), ctx_);
    metrics_.merge_counts(r.metrics);
    Chunk out;
    out.schema = shared_;
    out.row_offset = chunk->row_offset;
    out.columns = std::move(chunk->columns);
    std::vector<Value> derived;
    derived.reserve(r.values.size());
    for (auto& text : r.values) derived.emplace_back(std::move(text));
    out.columns.push_back(std::move(derived));
    return out;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  sql::NlExpr expr_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  OperatorMetrics metrics_;
};

// Fused pair where at least one side is a projection (filter+projection,
// projection+filter, projection+projection). Pure filter pairs live inside
// SemFilterBlockOp.
class FusedUnaryOp final : public Operator {
 public:
  FusedUnaryOp(const PlanNode& top, FusedPair pair, OperatorPtr child, ExecContext& ctx)
      : child_(std::move(child)), pair_(std::move(pair)), ctx_(ctx), schema_(top.schema),
        shared_(share(top.schema)) {
    metrics_.label = pair_.label();
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    while (auto chunk = child_->next()) {
      FusedResult r = eval_fused(*chunk, pair_, CallMode::from_options(ctx_.options), ctx_);
      metrics_.merge_counts(r.metrics);
      Chunk out = Chunk::empty_like(shared_, rows_emitted_);
      const std::size_t input_width = chunk->column_count();
      for (std::size_t row = 0; row < chunk->row_count(); ++row) {
        if (!r.mask[row]) continue;
        for (std::size_t c = 0; c < input_width; ++c)
          out.columns[c].push_back(chunk->cell(row, c));
        std::size_t c = input_width;
        if (!pair_.first.is_filter) out.columns[c++].push_back(r.first_values[row]);
        if (!pair_.second.is_filter) out.columns[c++].push_back(r.second_values[row]);
      }
      if (out.row_count() == 0) continue;
      rows_emitted_ += out.row_count();
      return out;
    }
    return std::nullopt;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  OperatorPtr child_;
  FusedPair pair_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t rows_emitted_ = 0;
  OperatorMetrics metrics_;
};

class SemJoinOp final : public Operator {
 public:
  SemJoinOp(const PlanNode& node, OperatorPtr left, OperatorPtr right, ExecContext& ctx)
      : expr_(*node.expr), rel_predicate_(node.rel_predicate), semi_(node.semi),
        left_(std::move(left)), right_(std::move(right)), ctx_(ctx), schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (!built_) {
      Table left = drain(*left_);
      Table right = drain(*right_);
      JoinResult r = eval_sem_join(left, right, expr_, rel_predicate_, semi_, schema_,
                                   CallMode::from_options(ctx_.options), ctx_);
      metrics_.merge_counts(r.metrics);
      emitter_.reset(r.rows, shared_, ctx_.options.chunk_capacity);
      built_ = true;
    }
    return emitter_.next();
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(left_->metrics_tree());
    tree.children.push_back(right_->metrics_tree());
    return tree;
  }

 private:
  sql::NlExpr expr_;
  sql::ExprPtr rel_predicate_;
  bool semi_;
  OperatorPtr left_;
  OperatorPtr right_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  bool built_ = false;
  ChunkEmitter emitter_;
  OperatorMetrics metrics_;
};

class SemOrderByOp final : public Operator {
 public:
  SemOrderByOp(const PlanNode& node, OperatorPtr child, ExecContext& ctx)
      : expr_(*node.expr), child_(std::move(child)), ctx_(ctx), schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    if (!built_) {
      Table input = drain(*child_);
      OrderResult r = eval_sem_orderby(input, expr_, ctx_);
      metrics_.merge_counts(r.metrics);
      Table out(schema_);
      for (std::size_t row : r.permutation) {
        std::vector<Value> values;
        for (std::size_t c = 0; c < input.column_count(); ++c)
          values.push_back(input.cell(row, c));
        out.append_row(std::move(values));
      }
      emitter_.reset(out, shared_, ctx_.options.chunk_capacity);
      built_ = true;
    }
    return emitter_.next();
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  sql::NlExpr expr_;
  OperatorPtr child_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  bool built_ = false;
  ChunkEmitter emitter_;
  OperatorMetrics metrics_;
};

// Aggregates each row's collected value list into one summary text, replacing
// the list column in place.
class SemAggOp final : public Operator {
 public:
  SemAggOp(const PlanNode& node, OperatorPtr child, ExecContext& ctx)
      : expr_(*node.expr), child_(std::move(child)), ctx_(ctx), schema_(node.schema),
        shared_(share(node.schema)) {
    metrics_.label = sql::node_label(node);
    const Schema& input = node.child()->schema;
    collect_index_ = input.size();
    for (std::size_t c = 0; c < input.size(); ++c) {
      if (input[c].name == node.collect_column) collect_index_ = c;
    }
    if (collect_index_ == input.size())
      throw ExecError(fmt::format("missing collected column '{}'", node.collect_column));
  }

  const Schema& schema() const override { return schema_; }

  std::optional<Chunk> next() override {
    WallAccumulator wall(metrics_.wall_ms);
    auto chunk = child_->next();
    if (!chunk) return std::nullopt;
    metrics_.rows_in += static_cast<std::int64_t>(chunk->row_count());
    Chunk out;
    out.schema = shared_;
    out.row_offset = chunk->row_offset;
    out.columns = chunk->columns;
    for (std::size_t row = 0; row < chunk->row_count(); ++row) {
      const Value& cell = chunk->cell(row, collect_index_);
      std::vector<std::string> values;
      if (const auto* list = std::get_if<std::vector<std::string>>(&cell)) values = *list;
      AggResult r = eval_sem_agg(values, expr_, ctx_.options.context_budget, ctx_);
      metrics_.llm_calls += r.metrics.llm_calls;
      metrics_.usage += r.metrics.usage;
      metrics_.latency_ms += r.metrics.latency_ms;
      out.columns[collect_index_][row] = std::move(r.text);
    }
    metrics_.rows_out += static_cast<std::int64_t>(chunk->row_count());
    return out;
  }

  OperatorMetrics metrics_tree() const override {
    OperatorMetrics tree = metrics_;
    tree.children.push_back(child_->metrics_tree());
    return tree;
  }

 private:
  sql::NlExpr expr_;
  OperatorPtr child_;
  ExecContext& ctx_;
  Schema schema_;
  std::shared_ptr<const Schema> shared_;
  std::size_t collect_index_ = 0;
  OperatorMetrics metrics_;
};

}  // namespace

OperatorPtr build_pipeline(const PlanPtr& plan, const catalog::Catalog& catalog,
                           ExecContext& ctx) {
  if (!plan) throw ExecError("cannot execute an empty plan");
  const PlanNode& node = *plan;
  switch (node.kind) {
    case PlanKind::Scan:
      return std::make_unique<ScanOp>(node, catalog, ctx.options);
    case PlanKind::RelFilter:
      return std::make_unique<RelFilterOp>(node, build_pipeline(node.child(), catalog, ctx));
    case PlanKind::RelProject:
      return std::make_unique<RelProjectOp>(node, build_pipeline(node.child(), catalog, ctx));
    case PlanKind::HashJoin:
      return std::make_unique<HashJoinOp>(node, build_pipeline(node.children[0], catalog, ctx),
                                          build_pipeline(node.children[1], catalog, ctx),
                                          ctx.options);
    case PlanKind::GroupBy:
      return std::make_unique<GroupByOp>(node, build_pipeline(node.child(), catalog, ctx),
                                         ctx.options);
    case PlanKind::OrderBy:
      return std::make_unique<OrderByOp>(node, build_pipeline(node.child(), catalog, ctx),
                                         ctx.options);
    case PlanKind::Limit:
      return std::make_unique<LimitOp>(node, build_pipeline(node.child(), catalog, ctx));
    case PlanKind::SemProj: {
      const PlanPtr& child = node.child();
      if (ctx.options.fusion) {
        // Dependent projection chain, or a lone filter feeding a projection
        // over a shared column, collapses into one fused operator.
        bool lone_filter = child->kind == PlanKind::SemFilter &&
                           child->child()->kind != PlanKind::SemFilter;
        if (child->kind == PlanKind::SemProj || lone_filter) {
          if (auto pair = fuse(*child, node)) {
            return std::make_unique<FusedUnaryOp>(
                node, std::move(*pair), build_pipeline(child->child(), catalog, ctx), ctx);
          }
        }
      }
      return std::make_unique<SemProjOp>(node, build_pipeline(child, catalog, ctx), ctx);
    }
    case PlanKind::SemFilter: {
      const PlanPtr& child = node.child();
      if (ctx.options.fusion && child->kind == PlanKind::SemProj) {
        if (auto pair = fuse(*child, node)) {
          return std::make_unique<FusedUnaryOp>(
              node, std::move(*pair), build_pipeline(child->child(), catalog, ctx), ctx);
        }
      }
      // Maximal run of consecutive semantic filters (this node deepest-last).
      std::vector<const PlanNode*> chain{&node};
      const PlanNode* bottom = &node;
      while (bottom->child()->kind == PlanKind::SemFilter) {
        bottom = bottom->child().get();
        chain.push_back(bottom);
      }
      std::reverse(chain.begin(), chain.end());
      if (ctx.options.aqe && chain.size() >= 2) {
        // A single filter has nothing to reorder, so it bypasses adaptation.
        return std::make_unique<AdaptiveFilterOp>(
            chain, build_pipeline(bottom->child(), catalog, ctx), ctx);
      }
      return std::make_unique<SemFilterBlockOp>(chain,
                                                build_pipeline(bottom->child(), catalog, ctx),
                                                ctx);
    }
    case PlanKind::SemJoin:
      return std::make_unique<SemJoinOp>(node, build_pipeline(node.children[0], catalog, ctx),
                                         build_pipeline(node.children[1], catalog, ctx), ctx);
    case PlanKind::SemOrderBy:
      return std::make_unique<SemOrderByOp>(node, build_pipeline(node.child(), catalog, ctx),
                                            ctx);
    case PlanKind::SemAgg:
      return std::make_unique<SemAggOp>(node, build_pipeline(node.child(), catalog, ctx), ctx);
  }
  throw ExecError("unhandled plan kind");
}

Table drain(Operator& op) {
  Table out(op.schema());
  while (auto chunk = op.next()) {
    for (std::size_t row = 0; row < chunk->row_count(); ++row) {
      std::vector<Value> values;
      values.reserve(chunk->column_count());
      for (std::size_t c = 0; c < chunk->column_count(); ++c) values.push_back(chunk->cell(row, c));
      out.append_row(std::move(values));
    }
  }
  return out;
}

ExecResult execute(const PlanPtr& plan, const catalog::Catalog& catalog, ExecContext& ctx) {
  OperatorPtr root = build_pipeline(plan, catalog, ctx);
  ExecResult result;
  result.table = drain(*root);
  result.metrics = root->metrics_tree();
  return result;
}

}  // namespace semq::exec
