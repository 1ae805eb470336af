#include "semq/opt/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "semq/opt/prompts.hpp"
#include "semq/sql/parser.hpp"

namespace semq::opt {

using catalog::ColumnStats;
using catalog::Schema;
using sql::ColumnRef;
using sql::NlExpr;
using sql::PlanKind;
using sql::PlanNode;
using sql::PlanPtr;

namespace {

std::string trim_copy(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// resolve_column without the ambiguity exception: ambiguous means unusable.
std::optional<std::size_t> safe_resolve(const Schema& schema, const ColumnRef& ref) {
  try {
    return catalog::resolve_column(schema, ref.qualifier, ref.name);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool covers(const Schema& schema, const std::vector<ColumnRef>& refs) {
  return std::all_of(refs.begin(), refs.end(),
                     [&](const ColumnRef& ref) { return safe_resolve(schema, ref).has_value(); });
}

// Rewrites the template's placeholders positionally: the k-th placeholder in
// order of appearance becomes mapped[k]. Brace escapes pass through intact.
NlExpr remap_template(const NlExpr& expr, const std::vector<ColumnRef>& mapped) {
  const std::string& text = expr.template_text;
  std::string out;
  out.reserve(text.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
      out += c;
      out += c;
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t close = text.find('}', i);
      if (close == std::string::npos) break;  // cannot happen: templates are validated
      out += '{';
      out += mapped.at(next++).display();
      out += '}';
      i = close + 1;
      continue;
    }
    out += c;
    ++i;
  }
  return sql::make_nl_expr(out, expr.span);
}

// Deduced predicates are restricted to a single comparison between one
// column and one literal: =, !=/<>, <, <=, >, >=, or column LIKE 'pattern'.
bool supported_predicate(const sql::ExprPtr& e) {
  if (!e || e->kind != sql::Expr::Kind::Binary) return false;
  auto is_col = [](const sql::ExprPtr& x) { return x && x->kind == sql::Expr::Kind::Column; };
  auto is_lit = [](const sql::ExprPtr& x) { return x && x->kind == sql::Expr::Kind::Literal; };
  switch (e->op) {
    case sql::BinaryOp::Like:
      return is_col(e->left) && is_lit(e->right);
    case sql::BinaryOp::Eq:
    case sql::BinaryOp::Ne:
    case sql::BinaryOp::Lt:
    case sql::BinaryOp::Le:
    case sql::BinaryOp::Gt:
    case sql::BinaryOp::Ge:
      return (is_col(e->left) && is_lit(e->right)) || (is_lit(e->left) && is_col(e->right));
    default:
      return false;
  }
}

PlanPtr make_rel_filter(sql::ExprPtr pred, PlanPtr child) {
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanKind::RelFilter;
  node->rel_predicate = std::move(pred);
  node->schema = child->schema;
  node->children.push_back(std::move(child));
  return node;
}

// Inserts `pred` as a RelFilter at the lowest position in `node`'s subtree
// where every referenced column is still available: filters, projections and
// sorts are transparent, joins admit descent into the one side that covers
// the columns (left only for semi joins), and everything else — Scan,
// RelProject, GroupBy, Limit, SemAgg — ends the descent.
PlanPtr insert_lowest(PlanPtr node, const sql::ExprPtr& pred,
                      const std::vector<ColumnRef>& refs) {
  switch (node->kind) {
    case PlanKind::RelFilter:
    case PlanKind::SemFilter:
    case PlanKind::SemProj:
    case PlanKind::OrderBy:
    case PlanKind::SemOrderBy:
      if (covers(node->child()->schema, refs)) {
        node->children[0] = insert_lowest(node->children[0], pred, refs);
        return node;
      }
      break;
    case PlanKind::HashJoin:
    case PlanKind::SemJoin: {
      std::size_t sides = node->semi ? 1 : node->children.size();
      std::size_t covering = sides;
      int hits = 0;
      for (std::size_t i = 0; i < sides; ++i) {
        if (covers(node->children[i]->schema, refs)) {
          ++hits;
          covering = i;
        }
      }
      if (hits == 1) {
        node->children[covering] = insert_lowest(node->children[covering], pred, refs);
        return node;
      }
      break;
    }
    default:
      break;
  }
  return make_rel_filter(pred, node);
}

// A base-table home for a column reference, found by walking the plan down
// through name-preserving operators and pure-column projection items.
struct TracedColumn {
  std::string table;
  std::size_t column = 0;
};

std::optional<TracedColumn> trace_to_scan(const PlanPtr& node, const ColumnRef& ref) {
  auto idx = safe_resolve(node->schema, ref);
  if (!idx) return std::nullopt;
  switch (node->kind) {
    case PlanKind::Scan:
      return TracedColumn{node->table_name, *idx};
    case PlanKind::RelFilter:
    case PlanKind::SemFilter:
    case PlanKind::OrderBy:
    case PlanKind::SemOrderBy:
    case PlanKind::Limit:
      return trace_to_scan(node->child(), ref);
    case PlanKind::SemProj:
    case PlanKind::SemAgg:
      if (node->schema[*idx].qualifier.empty() && node->schema[*idx].name == node->output_alias)
        return std::nullopt;  // the operator's own derived column
      return trace_to_scan(node->child(), ref);
    case PlanKind::GroupBy:
      if (*idx < node->group_keys.size())
        return trace_to_scan(node->child(), node->group_keys[*idx]);
      return std::nullopt;  // aggregate output
    case PlanKind::RelProject: {
      const auto& item = node->projections.at(*idx);
      if (item.expr && item.expr->kind == sql::Expr::Kind::Column)
        return trace_to_scan(node->child(), item.expr->column);
      return std::nullopt;  // computed column
    }
    case PlanKind::HashJoin:
    case PlanKind::SemJoin: {
      const PlanPtr* target = nullptr;
      for (const auto& c : node->children) {
        if (safe_resolve(c->schema, ref)) {
          if (target) return std::nullopt;  // matches both sides
          target = &c;
        }
      }
      return target ? trace_to_scan(*target, ref) : std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// Sinks the SemFilter at `slot` below operators that do not feed it:
// RelProject (placeholders remapped through pure-column items), SemProj
// whose derived column the filter does not reference, and sorts. `slot` ends
// up holding whatever operator took the filter's place.
bool push_filter_down(PlanPtr& slot) {
  PlanPtr filter = slot;
  if (!filter->expr) return false;
  PlanPtr child = filter->children[0];
  switch (child->kind) {
    case PlanKind::RelProject: {
      std::vector<ColumnRef> mapped;
      mapped.reserve(filter->expr->placeholders.size());
      for (const auto& ref : filter->expr->placeholders) {
        auto idx = safe_resolve(child->schema, ref);
        if (!idx) return false;
        const auto& item = child->projections.at(*idx);
        if (!item.expr || item.expr->kind != sql::Expr::Kind::Column) return false;
        if (!safe_resolve(child->child()->schema, item.expr->column)) return false;
        mapped.push_back(item.expr->column);
      }
      filter->expr = remap_template(*filter->expr, mapped);
      break;
    }
    case PlanKind::SemProj: {
      for (const auto& ref : filter->expr->placeholders) {
        auto idx = safe_resolve(child->schema, ref);
        if (!idx) return false;
        if (child->schema[*idx].qualifier.empty() &&
            child->schema[*idx].name == child->output_alias)
          return false;  // the filter consumes the projection's output
      }
      break;
    }
    case PlanKind::OrderBy:
    case PlanKind::SemOrderBy:
      break;
    default:
      return false;
  }
  filter->children[0] = child->children[0];
  filter->schema = filter->children[0]->schema;
  child->children[0] = filter;
  slot = child;
  push_filter_down(child->children[0]);
  return true;
}

void sink_sem_filters(PlanPtr& slot) {
  for (auto& c : slot->children) sink_sem_filters(c);
  if (slot->kind == PlanKind::SemFilter) push_filter_down(slot);
}

void sink_rel_filters(PlanPtr& slot) {
  for (auto& c : slot->children) sink_rel_filters(c);
  if (slot->kind != PlanKind::RelFilter) return;
  auto conjuncts = sql::split_conjuncts(slot->rel_predicate);
  PlanPtr sub = slot->children[0];
  for (const auto& conjunct : conjuncts) {
    std::vector<ColumnRef> refs;
    sql::collect_columns(conjunct, refs);
    sub = insert_lowest(sub, conjunct, refs);
  }
  slot = sub;
}

// The NL expression the way the deduction prompt's example shows it: the
// template with each placeholder replaced by the bare column name.
std::string render_nle(const NlExpr& expr) {
  return sql::instantiate_template(expr.template_text,
                                   [](const ColumnRef& ref) { return ref.name; });
}

}  // namespace

Optimizer::Optimizer(const catalog::Catalog& cat, llm::Gateway& gateway, OptimizerOptions options)
    : catalog_(cat), gateway_(gateway), options_(std::move(options)) {}

llm::LlmResponse Optimizer::aux_call(const llm::LlmRequest& request, OptimizerReport& report) {
  auto response = gateway_.cached_complete(request);
  ++report.aux_calls;
  if (!response.from_cache) {
    report.aux_usage += response.usage;
    report.aux_latency_ms += response.latency_ms;
  }
  return response;
}

sql::NlExpr Optimizer::compress_expression(const NlExpr& expr, OptimizerReport& report) {
  llm::LlmRequest request;
  request.model = options_.model;
  request.system_prompt = compression_prompt();
  request.user_prompt = fmt::format("Expression:\n{}\nRewritten:", expr.template_text);
  request.response_format = llm::ResponseFormat::free_text();
  llm::OracleStep step{"compress", expr.template_text,
                       {llm::OracleValue::of(expr.template_text)}, -1};
  request.oracle_items.push_back({{step}});

  auto response = aux_call(request, report);
  ExprRewrite rewrite{expr.template_text, trim_copy(response.text), false, ""};

  NlExpr compressed;
  bool parsed = false;
  try {
    compressed = sql::make_nl_expr(rewrite.after, expr.span);
    parsed = true;
  } catch (const Error& e) {
    rewrite.note = fmt::format("rejected: not a valid template ({})", e.what());
  }
  if (parsed) {
    if (compressed.placeholders != expr.distinct_placeholders()) {
      rewrite.note = "rejected: placeholder set changed";
    } else if (rewrite.after.size() > expr.template_text.size()) {
      rewrite.note = "rejected: longer than the original";
    } else {
      rewrite.accepted = true;
    }
  }
  report.compressions.push_back(rewrite);
  return rewrite.accepted ? compressed : expr;
}

std::vector<DeducedPredicate> Optimizer::deduce_predicates(
    const NlExpr& expr, const std::vector<ColumnStats>& stats, const Schema& input_schema,
    OptimizerReport& report) {
  std::vector<std::string> stat_lines;
  stat_lines.reserve(stats.size());
  for (const auto& s : stats) stat_lines.push_back(catalog::render_stats(s));

  llm::LlmRequest request;
  request.model = options_.model;
  request.system_prompt = deduction_prompt();
  request.user_prompt = fmt::format("NLE Predicate:\n{}\nColumn stats:\n{}\nOutput:",
                                    render_nle(expr), fmt::join(stat_lines, "\n"));
  request.response_format = llm::ResponseFormat::free_text();
  llm::OracleStep step{"deduce", expr.template_text, {}, -1};
  for (const auto& line : stat_lines) step.values.push_back(llm::OracleValue::of(line));
  request.oracle_items.push_back({{step}});

  auto response = aux_call(request, report);

  nlohmann::json doc = nlohmann::json::parse(response.text, nullptr, /*allow_exceptions=*/false);
  bool entire = false;
  nlohmann::json array = nlohmann::json::array();
  if (doc.is_object() && doc.contains("predicates") && doc["predicates"].is_array()) {
    entire = doc.value("entire", false);
    array = doc["predicates"];
  } else if (doc.is_array()) {
    array = doc;
  } else {
    report.notes.push_back(
        fmt::format("deduction for {} returned no predicate list", expr.display()));
    return {};
  }

  std::vector<DeducedPredicate> out;
  for (const auto& element : array) {
    if (!element.is_string()) {
      report.notes.push_back(
          fmt::format("deduction for {}: dropped a non-string entry", expr.display()));
      continue;
    }
    std::string text = element.get<std::string>();
    sql::ExprPtr predicate;
    try {
      predicate = sql::parse_predicate_text(text);
    } catch (const Error&) {
      report.notes.push_back(
          fmt::format("deduction for {}: dropped unparseable predicate \"{}\"", expr.display(),
                      text));
      continue;
    }
    if (!supported_predicate(predicate)) {
      report.notes.push_back(fmt::format(
          "deduction for {}: dropped \"{}\" (not a column-vs-literal comparison or LIKE)",
          expr.display(), text));
      continue;
    }
    std::vector<ColumnRef> refs;
    sql::collect_columns(predicate, refs);
    if (!covers(input_schema, refs)) {
      report.notes.push_back(fmt::format(
          "deduction for {}: dropped \"{}\" (references a column outside the filter's input)",
          expr.display(), text));
      continue;
    }
    DeducedPredicate deduced;
    deduced.sql_text = text;
    deduced.entire = entire;
    deduced.source_template = expr.template_text;
    deduced.predicate = predicate;
    out.push_back(std::move(deduced));
  }
  return out;
}

std::vector<bool> Optimizer::verify_necessary(const std::vector<NlExpr>& exprs,
                                              const std::vector<DeducedPredicate>& candidates,
                                              OptimizerReport& report) {
  if (candidates.empty()) return {};

  nlohmann::json nles = nlohmann::json::array();
  std::string key;
  for (const auto& e : exprs) {
    nles.push_back(e.template_text);
    if (!key.empty()) key += "\n";
    key += e.template_text;
  }
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& c : candidates) preds.push_back(c.sql_text);

  llm::LlmRequest request;
  request.model = options_.model;
  request.system_prompt = verification_prompt();
  request.user_prompt = fmt::format("NL Expressions: {}\nSQL Predicates: {}\nOutput:", nles.dump(),
                                    preds.dump());
  request.response_format = llm::ResponseFormat::json_array(candidates.size());
  for (const auto& c : candidates) {
    llm::OracleStep step{"verify", key, {llm::OracleValue::of(c.sql_text)}, -1};
    request.oracle_items.push_back({{step}});
  }

  auto response = aux_call(request, report);
  std::vector<bool> verdicts(candidates.size(), false);
  if (!response.parsed || !response.parsed->is_array() ||
      response.parsed->size() != candidates.size()) {
    report.notes.push_back(fmt::format("verification fell back to all-false: {}",
                                       response.parse_error.empty() ? "malformed answer"
                                                                    : response.parse_error));
    return verdicts;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& element = (*response.parsed)[i];
    if (!element.is_boolean()) {
      report.notes.push_back("verification fell back to all-false: non-boolean verdict");
      return std::vector<bool>(candidates.size(), false);
    }
    verdicts[i] = element.get<bool>();
  }
  return verdicts;
}

void Optimizer::compress_pass(const PlanPtr& node, OptimizerReport& report) {
  for (const auto& c : node->children) compress_pass(c, report);
  if (node->expr) node->expr = compress_expression(*node->expr, report);
}

void Optimizer::deduce_pass(PlanPtr& slot, OptimizerReport& report) {
  for (auto& c : slot->children) deduce_pass(c, report);
  if (slot->kind != PlanKind::SemFilter) return;

  const NlExpr expr = *slot->expr;
  std::vector<ColumnStats> stats;
  for (const auto& ref : expr.distinct_placeholders()) {
    auto traced = trace_to_scan(slot->children[0], ref);
    if (!traced) {
      report.notes.push_back(fmt::format(
          "deduction skipped for {}: no base-table statistics for '{}'", expr.display(),
          ref.display()));
      return;
    }
    stats.push_back(catalog::column_stats(catalog_.table(traced->table), traced->column,
                                          options_.stats_sample_rows));
  }

  auto candidates = deduce_predicates(expr, stats, slot->children[0]->schema, report);
  if (!candidates.empty()) {
    auto verdicts = verify_necessary({expr}, candidates, report);
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].verified = verdicts[i];

    PlanPtr sub = slot->children[0];
    for (auto& cand : candidates) {
      if (!cand.verified) continue;
      std::vector<ColumnRef> refs;
      sql::collect_columns(cand.predicate, refs);
      sub = insert_lowest(sub, cand.predicate, refs);
      cand.applied = true;
    }
    slot->children[0] = sub;

    bool entire = std::all_of(candidates.begin(), candidates.end(), [](const DeducedPredicate& p) {
      return p.verified && p.entire;
    });
    if (entire) {
      report.notes.push_back(fmt::format("entire deduction: {} replaced by relational predicates",
                                         expr.display()));
      slot = slot->children[0];
    }
  }
  report.predicates.insert(report.predicates.end(), candidates.begin(), candidates.end());
}

std::pair<PlanPtr, OptimizerReport> Optimizer::optimize(const PlanPtr& plan, OptimizerFlags flags) {
  OptimizerReport report;
  PlanPtr copy = sql::clone_plan(plan);
  if (flags.compression) compress_pass(copy, report);
  if (flags.deduction) deduce_pass(copy, report);
  if (flags.rewrites) {
    sink_sem_filters(copy);
    sink_rel_filters(copy);
  }
  return {copy, report};
}

PlanPtr apply_pushdown(const PlanPtr& plan, std::vector<DeducedPredicate>& predicates) {
  PlanPtr copy = sql::clone_plan(plan);

  // Locates the first SemFilter carrying the template and inserts below it.
  std::function<bool(PlanPtr&, DeducedPredicate&)> visit =
      [&](PlanPtr& slot, DeducedPredicate& pred) -> bool {
    for (auto& c : slot->children) {
      if (visit(c, pred)) return true;
    }
    if (slot->kind != PlanKind::SemFilter || !slot->expr ||
        slot->expr->template_text != pred.source_template) {
      return false;
    }
    std::vector<ColumnRef> refs;
    sql::collect_columns(pred.predicate, refs);
    slot->children[0] = insert_lowest(slot->children[0], pred.predicate, refs);
    pred.applied = true;
    return true;
  };

  for (auto& pred : predicates) {
    if (!pred.verified || !pred.predicate) continue;
    visit(copy, pred);
  }
  return copy;
}

PlanPtr standard_rewrites(const PlanPtr& plan) {
  PlanPtr copy = sql::clone_plan(plan);
  sink_sem_filters(copy);
  sink_rel_filters(copy);
  return copy;
}

nlohmann::json OptimizerReport::to_json() const {
  nlohmann::json doc;
  doc["compressions"] = nlohmann::json::array();
  for (const auto& c : compressions) {
    doc["compressions"].push_back({{"before", c.before},
                                   {"after", c.after},
                                   {"accepted", c.accepted},
                                   {"note", c.note}});
  }
  doc["predicates"] = nlohmann::json::array();
  for (const auto& p : predicates) {
    doc["predicates"].push_back({{"sql_text", p.sql_text},
                                 {"verified", p.verified},
                                 {"entire", p.entire},
                                 {"applied", p.applied},
                                 {"source_template", p.source_template}});
  }
  doc["notes"] = notes;
  doc["aux_calls"] = aux_calls;
  doc["aux_usage"] = {{"input_tokens", aux_usage.input_tokens},
                      {"output_tokens", aux_usage.output_tokens}};
  doc["aux_latency_ms"] = aux_latency_ms;
  return doc;
}

}  // namespace semq::opt
