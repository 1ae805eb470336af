#include "semq/exec/prompts.hpp"

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::exec {

using llm::LlmRequest;
using llm::OracleItem;
using llm::OracleStep;
using llm::OracleValue;
using llm::ResponseFormat;

namespace {

constexpr const char* kFilterSystem =
    "You evaluate whether a natural-language predicate holds for a database tuple. "
    "Respond with exactly true or false.";
constexpr const char* kFilterBatchSystem =
    "You evaluate whether a natural-language predicate holds for each tuple in a numbered "
    "list. Respond with a JSON array of booleans, one per tuple, in input order. Output the "
    "array only.";
constexpr const char* kProjSystem =
    "You derive the value described by a natural-language expression from a database tuple. "
    "Output only the value, with no explanation.";
constexpr const char* kProjBatchSystem =
    "You derive the value described by a natural-language expression for each tuple in a "
    "numbered list. Respond with a JSON array of strings, one per tuple, in input order. "
    "Output the array only.";
constexpr const char* kJoinSystem =
    "You evaluate whether a natural-language join condition holds for a pair of database "
    "tuples. Respond with exactly true or false.";
constexpr const char* kJoinBatchSystem =
    "You evaluate whether a natural-language join condition holds for each tuple pair in a "
    "numbered list. Respond with a JSON array of booleans, one per pair, in input order. "
    "Output the array only.";
constexpr const char* kOrderSystem =
    "You compare two database tuples under a natural-language ordering criterion. Respond "
    "with exactly true if tuple A should come before tuple B, otherwise false.";
constexpr const char* kAggSystem =
    "You aggregate a list of values according to a natural-language instruction. Output only "
    "the aggregate result, with no explanation.";
constexpr const char* kFusedSystem =
    "You perform two steps on one database tuple and respond with a JSON object "
    "{\"step1\": ..., \"step2\": ...}. A filter step's value is a boolean; a derivation "
    "step's value is a string. If step 1 is a filter and its verdict is false, set step2 to "
    "null. Output the object only.";
constexpr const char* kFusedBatchSystem =
    "You perform two steps on each tuple in a numbered list and respond with a JSON array "
    "holding one object {\"step1\": ..., \"step2\": ...} per tuple, in input order. A filter "
    "step's value is a boolean; a derivation step's value is a string. If step 1 is a filter "
    "and its verdict is false, set that tuple's step2 to null. Output the array only.";

std::string render_tuple_line(const BoundExpr& bound, const catalog::Chunk& chunk,
                              std::size_t row) {
  std::string line;
  for (std::size_t i = 0; i < bound.refs.size(); ++i) {
    if (!line.empty()) line += "; ";
    line += fmt::format("{}: {}", bound.refs[i].display(),
                        catalog::value_to_string(chunk.cell(row, bound.column_indexes[i])));
  }
  return line;
}

std::string numbered_tuples(const BoundExpr& bound, const catalog::Chunk& chunk,
                            std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t row = begin; row < end; ++row) {
    out += fmt::format("{}. {}\n", row - begin + 1, render_tuple_line(bound, chunk, row));
  }
  return out;
}

OracleStep make_step(const char* kind, const BoundExpr& bound, const catalog::Chunk& chunk,
                     std::size_t row) {
  OracleStep step;
  step.kind = kind;
  step.template_key = bound.template_text();
  for (std::size_t index : bound.column_indexes) {
    step.values.push_back(OracleValue::of(catalog::value_to_string(chunk.cell(row, index))));
  }
  return step;
}

LlmRequest base_request(const std::string& model, const char* system, std::string user,
                        ResponseFormat format) {
  LlmRequest req;
  req.model = model;
  req.system_prompt = system;
  req.user_prompt = std::move(user);
  req.response_format = format;
  return req;
}

}  // namespace

BoundExpr bind_expr(const sql::NlExpr& expr, const catalog::Schema& schema) {
  BoundExpr bound;
  bound.expr = &expr;
  bound.refs = expr.distinct_placeholders();
  for (const auto& ref : bound.refs) {
    auto index = catalog::resolve_column(schema, ref.qualifier, ref.name);
    if (!index)
      throw ExecError(fmt::format("placeholder '{}' not found at execution time",
                                  ref.display()));
    bound.column_indexes.push_back(*index);
  }
  return bound;
}

std::vector<std::string> row_values(const BoundExpr& bound, const catalog::Chunk& chunk,
                                    std::size_t row) {
  std::vector<std::string> values;
  values.reserve(bound.column_indexes.size());
  for (std::size_t index : bound.column_indexes) {
    values.push_back(catalog::value_to_string(chunk.cell(row, index)));
  }
  return values;
}

std::string instantiate(const BoundExpr& bound, const catalog::Chunk& chunk, std::size_t row) {
  return sql::instantiate_template(bound.template_text(), [&](const sql::ColumnRef& ref) {
    for (std::size_t i = 0; i < bound.refs.size(); ++i) {
      if (bound.refs[i] == ref)
        return catalog::value_to_string(chunk.cell(row, bound.column_indexes[i]));
    }
    throw ExecError(fmt::format("unresolved placeholder '{}'", ref.display()));
  });
}

LlmRequest filter_request(const BoundExpr& bound, const catalog::Chunk& chunk, std::size_t row,
                          const std::string& model) {
  auto req = base_request(
      model, kFilterSystem,
      fmt::format("Predicate: {}\nAnswer true or false only.", instantiate(bound, chunk, row)),
      ResponseFormat::json_bool());
  req.oracle_items.push_back({{make_step("filter", bound, chunk, row)}});
  return req;
}

LlmRequest batched_filter_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                                  std::size_t begin, std::size_t end,
                                  const std::string& model) {
  auto req = base_request(
      model, kFilterBatchSystem,
      fmt::format("Predicate template: {}\nTuples:\n{}Answer with a JSON array of {} "
                  "booleans.",
                  bound.template_text(), numbered_tuples(bound, chunk, begin, end),
                  end - begin),
      ResponseFormat::json_array(end - begin));
  for (std::size_t row = begin; row < end; ++row) {
    req.oracle_items.push_back({{make_step("filter", bound, chunk, row)}});
  }
  return req;
}

LlmRequest proj_request(const BoundExpr& bound, const catalog::Chunk& chunk, std::size_t row,
                        const std::string& model) {
  auto req = base_request(
      model, kProjSystem,
      fmt::format("{}\nOutput only the value.", instantiate(bound, chunk, row)),
      ResponseFormat::free_text());
  req.oracle_items.push_back({{make_step("proj", bound, chunk, row)}});
  return req;
}

LlmRequest batched_proj_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                                std::size_t begin, std::size_t end, const std::string& model) {
  auto req = base_request(
      model, kProjBatchSystem,
      fmt::format("Expression template: {}\nTuples:\n{}Answer with a JSON array of {} "
                  "strings.",
                  bound.template_text(), numbered_tuples(bound, chunk, begin, end),
                  end - begin),
      ResponseFormat::json_array(end - begin));
  for (std::size_t row = begin; row < end; ++row) {
    req.oracle_items.push_back({{make_step("proj", bound, chunk, row)}});
  }
  return req;
}

LlmRequest join_request(const BoundExpr& bound, const catalog::Chunk& pair, std::size_t row,
                        std::size_t left_ref_count, const std::string& model) {
  auto req = base_request(
      model, kJoinSystem,
      fmt::format("Condition: {}\nAnswer true or false only.", instantiate(bound, pair, row)),
      ResponseFormat::json_bool());
  OracleStep step = make_step("join", bound, pair, row);
  step.split = static_cast<int>(left_ref_count);
  req.oracle_items.push_back({{std::move(step)}});
  return req;
}

LlmRequest batched_join_request(const BoundExpr& bound, const catalog::Chunk& pair,
                                std::size_t begin, std::size_t end, std::size_t left_ref_count,
                                const std::string& model) {
  auto req = base_request(
      model, kJoinBatchSystem,
      fmt::format("Condition template: {}\nPairs:\n{}Answer with a JSON array of {} "
                  "booleans.",
                  bound.template_text(), numbered_tuples(bound, pair, begin, end),
                  end - begin),
      ResponseFormat::json_array(end - begin));
  for (std::size_t row = begin; row < end; ++row) {
    OracleStep step = make_step("join", bound, pair, row);
    step.split = static_cast<int>(left_ref_count);
    req.oracle_items.push_back({{std::move(step)}});
  }
  return req;
}

LlmRequest order_request(const BoundExpr& bound, const catalog::Chunk& chunk,
                         std::size_t row_a, std::size_t row_b, const std::string& model) {
  auto req = base_request(
      model, kOrderSystem,
      fmt::format("Criterion: {}\nA: {}\nB: {}\nShould A come before B? Answer true or false "
                  "only.",
                  bound.template_text(), render_tuple_line(bound, chunk, row_a),
                  render_tuple_line(bound, chunk, row_b)),
      ResponseFormat::json_bool());
  OracleStep step;
  step.kind = "order";
  step.template_key = bound.template_text();
  for (std::size_t index : bound.column_indexes)
    step.values.push_back(OracleValue::of(catalog::value_to_string(chunk.cell(row_a, index))));
  for (std::size_t index : bound.column_indexes)
    step.values.push_back(OracleValue::of(catalog::value_to_string(chunk.cell(row_b, index))));
  step.split = static_cast<int>(bound.column_indexes.size());
  req.oracle_items.push_back({{std::move(step)}});
  return req;
}

LlmRequest agg_request(const sql::NlExpr& expr, const std::vector<std::string>& values,
                       const std::string& model) {
  std::string list;
  for (const auto& value : values) list += fmt::format("- {}\n", value);
  auto req = base_request(
      model, kAggSystem,
      fmt::format("Instruction: {}\nValues:\n{}Output only the aggregate result.",
                  expr.template_text, list),
      ResponseFormat::free_text());
  OracleStep step;
  step.kind = "agg";
  step.template_key = expr.template_text;
  for (const auto& value : values) step.values.push_back(OracleValue::of(value));
  req.oracle_items.push_back({{std::move(step)}});
  return req;
}

namespace {

std::string fused_step_text(const FusedStepRender& step, const catalog::Chunk& chunk,
                            std::size_t row) {
  return sql::instantiate_template(
      step.bound->template_text(), [&](const sql::ColumnRef& ref) -> std::string {
        for (std::size_t i = 0; i < step.bound->refs.size(); ++i) {
          if (!(step.bound->refs[i] == ref)) continue;
          if (step.from_prev.size() > i && step.from_prev[i]) return "(the result of step 1)";
          return catalog::value_to_string(chunk.cell(row, step.bound->column_indexes[i]));
        }
        throw ExecError(fmt::format("unresolved placeholder '{}'", ref.display()));
      });
}

std::string fused_user_prompt(const FusedStepRender& first, const FusedStepRender& second,
                              const catalog::Chunk& chunk, std::size_t row) {
  return fmt::format("Step 1 ({}): {}\nStep 2 ({}): {}",
                     first.is_filter ? "filter" : "derive", fused_step_text(first, chunk, row),
                     second.is_filter ? "filter" : "derive",
                     fused_step_text(second, chunk, row));
}

OracleStep fused_oracle_step(const FusedStepRender& step, const catalog::Chunk& chunk,
                             std::size_t row) {
  OracleStep out;
  out.kind = step.is_filter ? "filter" : "proj";
  out.template_key = step.bound->template_text();
  for (std::size_t i = 0; i < step.bound->refs.size(); ++i) {
    if (step.from_prev.size() > i && step.from_prev[i]) {
      out.values.push_back(OracleValue::prev());
    } else {
      out.values.push_back(OracleValue::of(
          catalog::value_to_string(chunk.cell(row, step.bound->column_indexes[i]))));
    }
  }
  return out;
}

OracleItem fused_item(const FusedStepRender& first, const FusedStepRender& second,
                      const catalog::Chunk& chunk, std::size_t row) {
  OracleItem item;
  item.steps.push_back(fused_oracle_step(first, chunk, row));
  item.steps.push_back(fused_oracle_step(second, chunk, row));
  return item;
}

}  // namespace

LlmRequest fused_request(const FusedStepRender& first, const FusedStepRender& second,
                         const catalog::Chunk& chunk, std::size_t row,
                         const std::string& model) {
  auto req = base_request(model, kFusedSystem, fused_user_prompt(first, second, chunk, row),
                          ResponseFormat::free_text());
  req.oracle_items.push_back(fused_item(first, second, chunk, row));
  return req;
}

LlmRequest batched_fused_request(const FusedStepRender& first, const FusedStepRender& second,
                                 const catalog::Chunk& chunk, std::size_t begin,
                                 std::size_t end, const std::string& model) {
  std::string user;
  for (std::size_t row = begin; row < end; ++row) {
    user += fmt::format("{}.\n{}\n", row - begin + 1,
                        fused_user_prompt(first, second, chunk, row));
  }
  user += fmt::format("Answer with a JSON array of {} objects.", end - begin);
  auto req = base_request(model, kFusedBatchSystem, std::move(user),
                          ResponseFormat::json_array(end - begin));
  for (std::size_t row = begin; row < end; ++row) {
    req.oracle_items.push_back(fused_item(first, second, chunk, row));
  }
  return req;
}

}  // namespace semq::exec
