#include "semq/exec/semantic.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semq/common.hpp"
#include "semq/exec/scalar.hpp"

namespace semq::exec {

using catalog::Chunk;
using catalog::Schema;
using catalog::Table;
using sql::NlExpr;
using sql::PlanKind;
using sql::PlanNode;

namespace {

class WallTimer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Chunk to_chunk(const Table& table) {
  Chunk chunk;
  chunk.schema = std::make_shared<Schema>(table.schema());
  chunk.columns.resize(table.column_count());
  for (std::size_t c = 0; c < table.column_count(); ++c) chunk.columns[c] = table.column(c);
  return chunk;
}

bool parsed_bool(const llm::LlmResponse& response, bool fallback = false) {
  if (response.parsed && response.parsed->is_boolean()) return response.parsed->get<bool>();
  return fallback;
}

}  // namespace

FilterResult eval_sem_filter(const Chunk& chunk, const NlExpr& expr, CallMode mode,
                             ExecContext& ctx) {
  WallTimer timer;
  FilterResult result;
  result.metrics.label = fmt::format("SemFilter {}", expr.display());
  const std::size_t n = chunk.row_count();
  result.metrics.rows_in = static_cast<std::int64_t>(n);
  result.verdicts.assign(n, false);
  if (n > 0) {
    BoundExpr bound = bind_expr(expr, *chunk.schema);
    auto eval_one = [&](std::size_t row) {
      auto response = ctx.call(filter_request(bound, chunk, row, ctx.options.model));
      result.metrics.absorb_call(response);
      result.verdicts[row] = parsed_bool(response);
    };
    if (!mode.batched || mode.batch_size <= 1) {
      for (std::size_t row = 0; row < n; ++row) eval_one(row);
    } else {
      for (std::size_t begin = 0; begin < n; begin += mode.batch_size) {
        std::size_t end = std::min(n, begin + mode.batch_size);
        auto response =
            ctx.call(batched_filter_request(bound, chunk, begin, end, ctx.options.model));
        result.metrics.absorb_call(response);
        bool usable = response.parsed.has_value();
        if (usable) {
          for (const auto& element : *response.parsed) usable = usable && element.is_boolean();
        }
        if (usable) {
          for (std::size_t row = begin; row < end; ++row)
            result.verdicts[row] = (*response.parsed)[row - begin].get<bool>();
        } else {
          ++result.metrics.fallback_batches;
          for (std::size_t row = begin; row < end; ++row) eval_one(row);
        }
      }
    }
  }
  result.metrics.rows_out =
      std::count(result.verdicts.begin(), result.verdicts.end(), true);
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

ProjResult eval_sem_proj(const Chunk& chunk, const NlExpr& expr, CallMode mode,
                         ExecContext& ctx) {
  WallTimer timer;
  ProjResult result;
  result.metrics.label = fmt::format("SemProj {}", expr.display());
  const std::size_t n = chunk.row_count();
  result.metrics.rows_in = static_cast<std::int64_t>(n);
  result.metrics.rows_out = static_cast<std::int64_t>(n);
  result.values.assign(n, "");
  if (n > 0) {
    BoundExpr bound = bind_expr(expr, *chunk.schema);
    auto eval_one = [&](std::size_t row) {
      auto response = ctx.call(proj_request(bound, chunk, row, ctx.options.model));
      result.metrics.absorb_call(response);
      result.values[row] = response.text;
    };
    if (!mode.batched || mode.batch_size <= 1) {
      for (std::size_t row = 0; row < n; ++row) eval_one(row);
    } else {
      for (std::size_t begin = 0; begin < n; begin += mode.batch_size) {
        std::size_t end = std::min(n, begin + mode.batch_size);
        auto response =
            ctx.call(batched_proj_request(bound, chunk, begin, end, ctx.options.model));
        result.metrics.absorb_call(response);
        bool usable = response.parsed.has_value();
        if (usable) {
          for (const auto& element : *response.parsed) usable = usable && element.is_string();
        }
        if (usable) {
          for (std::size_t row = begin; row < end; ++row)
            result.values[row] = (*response.parsed)[row - begin].get<std::string>();
        } else {
          ++result.metrics.fallback_batches;
          for (std::size_t row = begin; row < end; ++row) eval_one(row);
        }
      }
    }
  }
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

JoinResult eval_sem_join(const Table& left, const Table& right, const NlExpr& expr,
                         const sql::ExprPtr& rel_predicate, bool semi,
                         const Schema& output_schema, CallMode mode, ExecContext& ctx) {
  WallTimer timer;
  JoinResult result;
  result.metrics.label = fmt::format("SemJoin {}", expr.display());
  result.metrics.rows_in = static_cast<std::int64_t>(left.row_count() + right.row_count());
  result.rows = Table(output_schema);

  Schema combined = left.schema();
  combined.insert(combined.end(), right.schema().begin(), right.schema().end());
  auto pair_schema = std::make_shared<Schema>(std::move(combined));

  auto make_pair_chunk = [&]() {
    Chunk chunk;
    chunk.schema = pair_schema;
    chunk.columns.resize(pair_schema->size());
    return chunk;
  };
  auto push_pair = [&](Chunk& chunk, std::size_t l, std::size_t r) {
    for (std::size_t c = 0; c < left.column_count(); ++c)
      chunk.columns[c].push_back(left.cell(l, c));
    for (std::size_t c = 0; c < right.column_count(); ++c)
      chunk.columns[left.column_count() + c].push_back(right.cell(r, c));
  };

  if (left.row_count() == 0 || right.row_count() == 0) {
    result.metrics.wall_ms = timer.elapsed_ms();
    return result;
  }

  BoundExpr bound = bind_expr(expr, *pair_schema);
  // Group the oracle payload left side first so pair-level default heuristics
  // see a clean split.
  {
    std::vector<std::size_t> order(bound.refs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(), [&](std::size_t i) {
      return bound.column_indexes[i] < left.column_count();
    });
    BoundExpr grouped;
    grouped.expr = bound.expr;
    for (std::size_t i : order) {
      grouped.refs.push_back(bound.refs[i]);
      grouped.column_indexes.push_back(bound.column_indexes[i]);
    }
    bound = std::move(grouped);
  }
  std::size_t left_ref_count = 0;
  for (std::size_t index : bound.column_indexes)
    if (index < left.column_count()) ++left_ref_count;

  auto emit = [&](const Chunk& pair_chunk, std::size_t pair_row) {
    std::vector<catalog::Value> row;
    for (std::size_t c = 0; c < output_schema.size(); ++c)
      row.push_back(pair_chunk.cell(pair_row, c));
    result.rows.append_row(std::move(row));
  };

  if (semi) {
    // Emit each left row at most once; stop probing on the first match.
    for (std::size_t l = 0; l < left.row_count(); ++l) {
      for (std::size_t r = 0; r < right.row_count(); ++r) {
        Chunk pair = make_pair_chunk();
        push_pair(pair, l, r);
        if (rel_predicate && !eval_predicate(rel_predicate, pair, 0)) continue;
        auto response = ctx.call(join_request(bound, pair, 0, left_ref_count, ctx.options.model));
        result.metrics.absorb_call(response);
        if (parsed_bool(response)) {
          emit(pair, 0);
          break;
        }
      }
    }
  } else {
    Chunk pairs = make_pair_chunk();
    for (std::size_t l = 0; l < left.row_count(); ++l) {
      for (std::size_t r = 0; r < right.row_count(); ++r) {
        push_pair(pairs, l, r);
        if (rel_predicate && !eval_predicate(rel_predicate, pairs, pairs.row_count() - 1)) {
          for (auto& column : pairs.columns) column.pop_back();
        }
      }
    }
    const std::size_t n = pairs.row_count();
    std::vector<bool> verdicts(n, false);
    auto eval_one = [&](std::size_t row) {
      auto response = ctx.call(join_request(bound, pairs, row, left_ref_count, ctx.options.model));
      result.metrics.absorb_call(response);
      verdicts[row] = parsed_bool(response);
    };
    if (!mode.batched || mode.batch_size <= 1) {
      for (std::size_t row = 0; row < n; ++row) eval_one(row);
    } else {
      for (std::size_t begin = 0; begin < n; begin += mode.batch_size) {
        std::size_t end = std::min(n, begin + mode.batch_size);
        auto response = ctx.call(
            batched_join_request(bound, pairs, begin, end, left_ref_count, ctx.options.model));
        result.metrics.absorb_call(response);
        bool usable = response.parsed.has_value();
        if (usable) {
          for (const auto& element : *response.parsed) usable = usable && element.is_boolean();
        }
        if (usable) {
          for (std::size_t row = begin; row < end; ++row)
            verdicts[row] = (*response.parsed)[row - begin].get<bool>();
        } else {
          ++result.metrics.fallback_batches;
          for (std::size_t row = begin; row < end; ++row) eval_one(row);
        }
      }
    }
    for (std::size_t row = 0; row < n; ++row)
      if (verdicts[row]) emit(pairs, row);
  }

  result.metrics.rows_out = static_cast<std::int64_t>(result.rows.row_count());
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

OrderResult eval_sem_orderby(const Table& rows, const NlExpr& expr, ExecContext& ctx) {
  WallTimer timer;
  OrderResult result;
  result.metrics.label = fmt::format("SemOrderBy {}", expr.display());
  const std::size_t n = rows.row_count();
  result.metrics.rows_in = static_cast<std::int64_t>(n);
  result.metrics.rows_out = static_cast<std::int64_t>(n);
  result.permutation.resize(n);
  std::iota(result.permutation.begin(), result.permutation.end(), 0);
  if (n >= 2) {
    Chunk chunk = to_chunk(rows);
    BoundExpr bound = bind_expr(expr, *chunk.schema);
    auto& perm = result.permutation;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::size_t best = i;
      for (std::size_t j = i + 1; j < n; ++j) {
        auto response =
            ctx.call(order_request(bound, chunk, perm[j], perm[best], ctx.options.model));
        result.metrics.absorb_call(response);
        if (parsed_bool(response)) best = j;
      }
      std::swap(perm[i], perm[best]);
    }
  }
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

AggResult eval_sem_agg(const std::vector<std::string>& values, const NlExpr& expr,
                       std::size_t context_budget, ExecContext& ctx) {
  WallTimer timer;
  AggResult result;
  result.metrics.label = fmt::format("SemAgg {}", expr.display());
  result.metrics.rows_in = static_cast<std::int64_t>(values.size());
  result.metrics.rows_out = values.empty() ? 0 : 1;
  if (values.empty()) {
    result.metrics.wall_ms = timer.elapsed_ms();
    return result;
  }

  std::vector<std::string> level = values;
  bool first_level = true;
  while (true) {
    // Greedy packing: a group takes values while their summed token estimate
    // stays within the budget.
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> current;
    std::int64_t current_tokens = 0;
    for (std::size_t i = 0; i < level.size(); ++i) {
      std::int64_t tokens = llm::estimate_tokens(level[i]);
      if (tokens > static_cast<std::int64_t>(context_budget)) {
        if (first_level)
          throw ExecError(fmt::format(
              "aggregate input at row {} exceeds the context budget ({} tokens > {})", i,
              tokens, context_budget));
        throw ExecError("aggregation cannot make progress under the context budget");
      }
      if (!current.empty() &&
          current_tokens + tokens > static_cast<std::int64_t>(context_budget)) {
        groups.push_back(std::move(current));
        current.clear();
        current_tokens = 0;
      }
      current.push_back(level[i]);
      current_tokens += tokens;
    }
    if (!current.empty()) groups.push_back(std::move(current));
    if (groups.size() >= level.size() && level.size() > 1)
      throw ExecError("aggregation cannot make progress under the context budget");

    std::vector<std::string> summaries;
    summaries.reserve(groups.size());
    for (const auto& group : groups) {
      auto response = ctx.call(agg_request(expr, group, ctx.options.model));
      result.metrics.absorb_call(response);
      summaries.push_back(response.text);
    }
    if (summaries.size() == 1) {
      result.text = summaries.front();
      break;
    }
    level = std::move(summaries);
    first_level = false;
  }
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

std::string FusedPair::label() const {
  return fmt::format("SemFused[{}] {} + {}", pattern, first.expr.display(),
                     second.expr.display());
}

std::optional<FusedPair> fuse(const PlanNode& a, const PlanNode& b) {
  auto is_filter = [](const PlanNode& node) { return node.kind == PlanKind::SemFilter; };
  auto is_proj = [](const PlanNode& node) { return node.kind == PlanKind::SemProj; };
  if (!(is_filter(a) || is_proj(a)) || !(is_filter(b) || is_proj(b))) return std::nullopt;
  if (!a.expr || !b.expr) return std::nullopt;

  FusedPair pair;
  pair.first = {is_filter(a), *a.expr, a.output_alias};
  pair.second = {is_filter(b), *b.expr, b.output_alias};
  auto b_refs = b.expr->distinct_placeholders();
  pair.second_from_prev.assign(b_refs.size(), false);

  if (is_filter(a)) {
    // Filter-first: the expressions must share a column of the common input.
    auto a_refs = a.expr->distinct_placeholders();
    std::vector<std::size_t> a_indexes;
    for (const auto& ref : a_refs) {
      auto index = catalog::resolve_column(a.schema, ref.qualifier, ref.name);
      if (index) a_indexes.push_back(*index);
    }
    bool common = false;
    for (const auto& ref : b_refs) {
      auto index = catalog::resolve_column(a.schema, ref.qualifier, ref.name);
      if (index && std::find(a_indexes.begin(), a_indexes.end(), *index) != a_indexes.end())
        common = true;
    }
    if (!common) return std::nullopt;
    pair.pattern = is_filter(b) ? "filter+filter" : "filter+projection";
  } else {
    // Projection-first: the second expression must consume the first's alias
    // (the column the projection appends to its output schema).
    const std::size_t alias_index = a.schema.size() - 1;
    bool references_alias = false;
    for (std::size_t i = 0; i < b_refs.size(); ++i) {
      auto index = catalog::resolve_column(a.schema, b_refs[i].qualifier, b_refs[i].name);
      if (index && *index == alias_index) {
        pair.second_from_prev[i] = true;
        references_alias = true;
      }
    }
    if (!references_alias) return std::nullopt;
    pair.pattern = is_filter(b) ? "projection+filter" : "projection+projection";
  }
  return pair;
}

namespace {

struct FusedBindings {
  BoundExpr first;
  BoundExpr second;
  FusedStepRender first_render;
  FusedStepRender second_render;
};

FusedBindings bind_fused(const FusedPair& pair, const Schema& input_schema,
                         Schema& extended_storage) {
  FusedBindings bindings;
  bindings.first = bind_expr(pair.first.expr, input_schema);
  extended_storage = input_schema;
  if (!pair.first.is_filter) {
    extended_storage.push_back({"", pair.first.alias, catalog::ColumnType::Text});
  }
  bindings.second = bind_expr(pair.second.expr, extended_storage);
  bindings.first_render = {pair.first.is_filter, &bindings.first, {}};
  bindings.second_render = {pair.second.is_filter, &bindings.second, pair.second_from_prev};
  return bindings;
}

// Per-tuple request for the second step of a projection-first pair, with the
// alias placeholders already substituted by the produced text. Mirrors the
// wording of the standard per-tuple builders.
llm::LlmRequest prev_fed_request(
    const FusedPair& pair, const FusedBindings& bindings,
    const std::function<std::string(const sql::ColumnRef&)>& resolve,
    const std::string& model) {
  llm::LlmRequest request;
  request.model = model;
  llm::OracleStep step;
  step.kind = pair.second.is_filter ? "filter" : "proj";
  step.template_key = pair.second.expr.template_text;
  for (const auto& ref : bindings.second.refs)
    step.values.push_back(llm::OracleValue::of(resolve(ref)));
  std::string instantiated = sql::instantiate_template(pair.second.expr.template_text, resolve);
  if (pair.second.is_filter) {
    request.system_prompt =
        "You evaluate whether a natural-language predicate holds for a database tuple. "
        "Respond with exactly true or false.";
    request.user_prompt = fmt::format("Predicate: {}\nAnswer true or false only.", instantiated);
    request.response_format = llm::ResponseFormat::json_bool();
  } else {
    request.system_prompt =
        "You derive the value described by a natural-language expression from a database "
        "tuple. Output only the value, with no explanation.";
    request.user_prompt = fmt::format("{}\nOutput only the value.", instantiated);
    request.response_format = llm::ResponseFormat::free_text();
  }
  request.oracle_items.push_back({{std::move(step)}});
  return request;
}

}  // namespace

FusedResult eval_fused(const Chunk& chunk, const FusedPair& pair, CallMode mode,
                       ExecContext& ctx) {
  WallTimer timer;
  FusedResult result;
  result.metrics.label = pair.label();
  const std::size_t n = chunk.row_count();
  result.metrics.rows_in = static_cast<std::int64_t>(n);
  result.mask.assign(n, true);
  result.first_values.assign(n, "");
  result.second_values.assign(n, "");
  if (n == 0) {
    result.metrics.wall_ms = timer.elapsed_ms();
    return result;
  }

  Schema extended;
  FusedBindings bindings = bind_fused(pair, *chunk.schema, extended);
  // Re-anchor the render pointers: the struct may have moved on return.
  bindings.first_render.bound = &bindings.first;
  bindings.second_render.bound = &bindings.second;

  auto interpret = [&](const nlohmann::json& item, std::size_t row) -> bool {
    if (!item.is_object() || !item.contains("step1")) return false;
    const auto& step1 = item.at("step1");
    nlohmann::json step2 = item.contains("step2") ? item.at("step2") : nlohmann::json();
    bool pass1 = true;
    if (pair.first.is_filter) {
      if (!step1.is_boolean()) return false;
      pass1 = step1.get<bool>();
    } else {
      if (!step1.is_string()) return false;
      result.first_values[row] = step1.get<std::string>();
    }
    if (pair.first.is_filter && !pass1) {
      // Short-circuited: step2 is expected to be null and carries no verdict.
      result.mask[row] = false;
      return true;
    }
    bool pass2 = true;
    if (pair.second.is_filter) {
      if (!step2.is_boolean()) return false;
      pass2 = step2.get<bool>();
    } else {
      if (!step2.is_string()) return false;
      result.second_values[row] = step2.get<std::string>();
    }
    result.mask[row] = pass1 && pass2;
    return true;
  };

  // Repair path for malformed fused responses: evaluate the two steps as
  // separate calls, feeding the first step's output into the second when the
  // pattern is projection-first.
  auto eval_row_split = [&](std::size_t row) {
    if (pair.first.is_filter) {
      auto response = ctx.call(filter_request(bindings.first, chunk, row, ctx.options.model));
      result.metrics.absorb_call(response);
      if (!parsed_bool(response)) {
        result.mask[row] = false;
        return;
      }
      // Filter-first: the second step reads only input columns, so the
      // standard per-tuple builders apply verbatim.
      if (pair.second.is_filter) {
        auto second = ctx.call(filter_request(bindings.second, chunk, row, ctx.options.model));
        result.metrics.absorb_call(second);
        result.mask[row] = parsed_bool(second);
      } else {
        auto second = ctx.call(proj_request(bindings.second, chunk, row, ctx.options.model));
        result.metrics.absorb_call(second);
        result.second_values[row] = second.text;
        result.mask[row] = true;
      }
      return;
    }
    auto response = ctx.call(proj_request(bindings.first, chunk, row, ctx.options.model));
    result.metrics.absorb_call(response);
    std::string prev_text = response.text;
    result.first_values[row] = prev_text;
    // Second step with alias placeholders substituted by the produced text.
    auto resolve = [&](const sql::ColumnRef& ref) -> std::string {
      for (std::size_t i = 0; i < bindings.second.refs.size(); ++i) {
        if (!(bindings.second.refs[i] == ref)) continue;
        if (pair.second_from_prev.size() > i && pair.second_from_prev[i]) return prev_text;
        return catalog::value_to_string(chunk.cell(row, bindings.second.column_indexes[i]));
      }
      throw ExecError(fmt::format("unresolved placeholder '{}'", ref.display()));
    };
    auto second = ctx.call(prev_fed_request(pair, bindings, resolve, ctx.options.model));
    result.metrics.absorb_call(second);
    if (pair.second.is_filter) {
      result.mask[row] = parsed_bool(second);
    } else {
      result.second_values[row] = second.text;
      result.mask[row] = true;
    }
  };

  auto eval_row_fused = [&](std::size_t row) {
    auto response = ctx.call(fused_request(bindings.first_render, bindings.second_render,
                                           chunk, row, ctx.options.model));
    result.metrics.absorb_call(response);
    nlohmann::json item = nlohmann::json::parse(response.text, nullptr, false);
    if (!interpret(item, row)) {
      ++result.metrics.fallback_batches;
      eval_row_split(row);
    }
  };

  if (!mode.batched || mode.batch_size <= 1) {
    for (std::size_t row = 0; row < n; ++row) eval_row_fused(row);
  } else {
    for (std::size_t begin = 0; begin < n; begin += mode.batch_size) {
      std::size_t end = std::min(n, begin + mode.batch_size);
      auto response = ctx.call(batched_fused_request(
          bindings.first_render, bindings.second_render, chunk, begin, end, ctx.options.model));
      result.metrics.absorb_call(response);
      if (response.parsed) {
        for (std::size_t row = begin; row < end; ++row) {
          if (!interpret((*response.parsed)[row - begin], row)) {
            ++result.metrics.fallback_batches;
            eval_row_split(row);
          }
        }
      } else {
        ++result.metrics.fallback_batches;
        for (std::size_t row = begin; row < end; ++row) eval_row_fused(row);
      }
    }
  }

  result.metrics.rows_out = std::count(result.mask.begin(), result.mask.end(), true);
  result.metrics.wall_ms = timer.elapsed_ms();
  return result;
}

}  // namespace semq::exec
