#include <doctest.h>

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "semq/catalog/catalog.hpp"
#include "semq/exec/executor.hpp"
#include "semq/llm/gateway.hpp"
#include "semq/llm/mock.hpp"
#include "semq/opt/optimizer.hpp"
#include "semq/opt/prompts.hpp"
#include "semq/sql/parser.hpp"
#include "semq/sql/planner.hpp"

using namespace semq;
using catalog::ColumnType;
using catalog::Schema;
using catalog::Table;
using opt::DeducedPredicate;
using opt::Optimizer;
using opt::OptimizerFlags;
using opt::OptimizerReport;
using sql::PlanKind;
using sql::PlanPtr;

namespace {

llm::MockRule rule_of(std::string kind, std::string template_contains, std::string value_contains) {
  llm::MockRule rule;
  rule.kind = std::move(kind);
  rule.template_contains = std::move(template_contains);
  rule.value_contains = std::move(value_contains);
  return rule;
}

llm::MockRule filter_rule(std::string template_contains, std::string value_contains, bool verdict) {
  auto rule = rule_of("filter", std::move(template_contains), std::move(value_contains));
  rule.verdict = verdict;
  return rule;
}

llm::MockRule compress_rule(std::string template_contains, std::string text) {
  auto rule = rule_of("compress", std::move(template_contains), "");
  rule.action = "const";
  rule.text = std::move(text);
  return rule;
}

llm::MockRule deduce_rule(std::string template_contains, nlohmann::json verdict) {
  auto rule = rule_of("deduce", std::move(template_contains), "");
  rule.verdict_json = std::move(verdict);
  return rule;
}

llm::MockRule verify_rule(std::string value_contains, bool verdict) {
  auto rule = rule_of("verify", "", std::move(value_contains));
  rule.verdict = verdict;
  return rule;
}

struct Fixture {
  catalog::Catalog cat;
  std::shared_ptr<llm::MockProvider> mock;
  llm::Gateway gateway;
  exec::ExecOptions options;

  explicit Fixture(llm::MockConfig config = {})
      : mock(std::make_shared<llm::MockProvider>(std::move(config))), gateway(mock) {
    options.batching = false;
    options.fusion = false;
  }

  Optimizer optimizer() { return Optimizer(cat, gateway); }

  exec::ExecResult run_plan(const PlanPtr& plan) {
    exec::ExecContext ctx{gateway, options};
    return exec::execute(plan, cat, ctx);
  }

  std::int64_t upstream() const { return gateway.accounting().upstream_calls; }
};

// The appendix-style review table: `count` rows, `nan_count` of them 'nan'.
Table review_table(int count, int nan_count) {
  Schema schema{{"", "app", ColumnType::Text}, {"", "Translated_Review", ColumnType::Text}};
  Table table(schema);
  const std::vector<std::string> texts{"Good", "Great", "Really good", "Negative", "Loved it"};
  for (int i = 0; i < count; ++i) {
    std::string review = i < nan_count ? "nan" : texts[i % texts.size()];
    table.append_row({fmt::format("app{:03d}", i), review});
  }
  return table;
}

// 100 rows; rows [0,30) mention alpha.
Table alpha_corpus() {
  Schema schema{{"", "app", ColumnType::Text}, {"", "review", ColumnType::Text}};
  Table table(schema);
  for (int i = 0; i < 100; ++i) {
    std::string review = fmt::format("note {:03d}", i);
    if (i < 30) review += " alpha";
    table.append_row({fmt::format("app{:03d}", i), review});
  }
  return table;
}

std::vector<std::string> explain_lines(const PlanPtr& plan) {
  std::vector<std::string> lines;
  std::string text = sql::explain(plan);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    std::size_t indent = line.find_first_not_of(' ');
    lines.push_back(indent == std::string::npos ? line : line.substr(indent));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

// Index of the first line starting with `prefix`, or npos.
std::size_t line_index(const std::vector<std::string>& lines, const std::string& prefix) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind(prefix, 0) == 0) return i;
  }
  return std::string::npos;
}

std::multiset<std::vector<std::string>> row_set(const catalog::Table& table) {
  std::multiset<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      row.push_back(catalog::value_to_string(table.cell(r, c)));
    }
    rows.insert(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("prompt texts state the contract without naming any external tool") {
  CHECK(opt::deduction_prompt().find("necessary SQL preconditions") != std::string::npos);
  CHECK(opt::deduction_prompt().find("JSON array of strings") != std::string::npos);
  CHECK(opt::deduction_prompt().find("DuckDB") == std::string::npos);
  CHECK(opt::verification_prompt().find("NECESSARY CONDITION") != std::string::npos);
  CHECK(opt::verification_prompt().find("JSON array of booleans") != std::string::npos);
  CHECK(opt::compression_prompt().find("placeholder") != std::string::npos);
}

TEST_CASE("compression accepts a shorter rewrite that keeps the placeholders") {
  llm::MockConfig config;
  config.rules.push_back(compress_rule("kindly", "{review} is positive"));
  Fixture fx(config);
  OptimizerReport report;
  auto original =
      sql::make_nl_expr("kindly check whether the {review} text is actually positive in tone");
  auto optimizer = fx.optimizer();
  auto compressed = optimizer.compress_expression(original, report);
  CHECK(compressed.template_text == "{review} is positive");
  REQUIRE(report.compressions.size() == 1);
  CHECK(report.compressions[0].accepted);
  CHECK(report.compressions[0].before == original.template_text);
  CHECK(report.compressions[0].after == "{review} is positive");
  CHECK(report.aux_calls == 1);
}

TEST_CASE("compression echo is an accepted fixed point") {
  Fixture fx;
  OptimizerReport report;
  auto original = sql::make_nl_expr("{review} is positive");
  auto optimizer = fx.optimizer();
  auto compressed = optimizer.compress_expression(original, report);
  CHECK(compressed.template_text == original.template_text);
  REQUIRE(report.compressions.size() == 1);
  CHECK(report.compressions[0].accepted);
}

TEST_CASE("compression rejects placeholder loss, growth, and duplicates") {
  auto run_one = [](llm::MockConfig config, const std::string& templ) {
    Fixture fx(std::move(config));
    OptimizerReport report;
    auto original = sql::make_nl_expr(templ);
    auto optimizer = fx.optimizer();
    auto compressed = optimizer.compress_expression(original, report);
    CHECK(compressed.template_text == original.template_text);  // original retained
    REQUIRE(report.compressions.size() == 1);
    CHECK_FALSE(report.compressions[0].accepted);
    return report.compressions[0].note;
  };

  llm::MockConfig drops;
  drops.rules.push_back(compress_rule("", "{app} is positive"));
  CHECK(run_one(drops, "the {review} is quite positive").find("placeholder") !=
        std::string::npos);

  llm::MockConfig grows;
  grows.rules.push_back(
      compress_rule("", "{review} is positive beyond any reasonable doubt whatsoever"));
  CHECK(run_one(grows, "{review} is positive").find("longer") != std::string::npos);

  // Default echo of a template with a repeated placeholder: the result keeps
  // the duplicate, so it cannot equal the distinct-placeholder set.
  CHECK(run_one({}, "{review} repeats and {review} repeats").find("placeholder") !=
        std::string::npos);

  llm::MockConfig garbled;
  garbled.rules.push_back(compress_rule("", "{review is positive"));
  CHECK(run_one(garbled, "the {review} is quite positive").find("template") !=
        std::string::npos);
}

TEST_CASE("deduction reproduces the worked review example") {
  llm::MockConfig config;
  config.rules.push_back(deduce_rule(
      "positive user review",
      nlohmann::json::array({"Translated_Review != 'nan'", "Translated_Review != 'Negative'"})));
  config.rules.push_back(verify_rule("!= 'nan'", true));
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(12, 4));

  auto expr = sql::make_nl_expr("{Translated_Review} is a positive user review");
  auto stats = catalog::column_stats(fx.cat.table("user_reviews"), 1);
  CHECK(stats.top_values.front().first == "nan");

  OptimizerReport report;
  auto optimizer = fx.optimizer();
  auto candidates =
      optimizer.deduce_predicates(expr, {stats}, fx.cat.table("user_reviews").schema(), report);
  REQUIRE(candidates.size() == 2);
  CHECK(candidates[0].sql_text == "Translated_Review != 'nan'");
  CHECK(candidates[1].sql_text == "Translated_Review != 'Negative'");
  CHECK_FALSE(candidates[0].entire);

  auto verdicts = optimizer.verify_necessary({expr}, candidates, report);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0]);
  CHECK_FALSE(verdicts[1]);
  CHECK(report.aux_calls == 2);  // one deduction + one verification
}

TEST_CASE("deduction drops unparseable, unsupported, and unbound candidates") {
  llm::MockConfig config;
  config.rules.push_back(deduce_rule(
      "meaningful", nlohmann::json::array({"congratulations !!", "ghost_column != 'x'",
                                           "Translated_Review != 'nan' AND app = 'a'",
                                           "app IS NOT NULL", "Translated_Review != 'nan'"})));
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(6, 2));

  auto expr = sql::make_nl_expr("{Translated_Review} is meaningful");
  auto stats = catalog::column_stats(fx.cat.table("user_reviews"), 1);
  OptimizerReport report;
  auto optimizer = fx.optimizer();
  auto candidates =
      optimizer.deduce_predicates(expr, {stats}, fx.cat.table("user_reviews").schema(), report);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].sql_text == "Translated_Review != 'nan'");
  CHECK(report.notes.size() == 4);  // one note per dropped entry
}

TEST_CASE("deduction returns empty on a non-list answer and verification falls back closed") {
  llm::MockConfig config;
  config.rules.push_back(deduce_rule("odd", nlohmann::json("just text")));
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(4, 1));
  auto expr = sql::make_nl_expr("{Translated_Review} is odd");
  auto stats = catalog::column_stats(fx.cat.table("user_reviews"), 1);
  OptimizerReport report;
  auto optimizer = fx.optimizer();
  CHECK(optimizer.deduce_predicates(expr, {stats}, fx.cat.table("user_reviews").schema(), report)
            .empty());
  CHECK_FALSE(report.notes.empty());

  // Empty candidate list: no call, empty verdicts.
  auto before = report.aux_calls;
  CHECK(optimizer.verify_necessary({expr}, {}, report).empty());
  CHECK(report.aux_calls == before);
}

TEST_CASE("a truncated verification array fails closed to all-false") {
  llm::MockConfig config;
  config.batch.sabotage = "truncate_first";
  config.rules.push_back(deduce_rule(
      "positive", nlohmann::json::array({"Translated_Review != 'nan'",
                                         "Translated_Review != 'Negative'"})));
  config.rules.push_back(verify_rule("", true));  // would verify everything if parsed
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(8, 3));

  auto plan = sql::plan_query(
      "SELECT app FROM user_reviews WHERE s'{Translated_Review} is positive'", fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan, {.compression = false});

  CHECK(sql::count_nodes(optimized, PlanKind::RelFilter) == 0);
  CHECK(sql::count_nodes(optimized, PlanKind::SemFilter) == 1);
  REQUIRE(report.predicates.size() == 2);
  CHECK_FALSE(report.predicates[0].verified);
  CHECK_FALSE(report.predicates[1].verified);
  bool noted = std::any_of(report.notes.begin(), report.notes.end(), [](const std::string& n) {
    return n.find("all-false") != std::string::npos;
  });
  CHECK(noted);
}

TEST_CASE("verified predicates are pushed to the scan and the filter stays") {
  llm::MockConfig config;
  config.rules.push_back(
      deduce_rule("positive", nlohmann::json::array({"Translated_Review != 'nan'"})));
  config.rules.push_back(verify_rule("!= 'nan'", true));
  config.rules.push_back(filter_rule("positive", "nan", false));
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(12, 5));

  auto plan = sql::plan_query(
      "SELECT Translated_Review FROM user_reviews WHERE s'{Translated_Review} is a positive "
      "user review'",
      fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan);

  auto lines = explain_lines(optimized);
  auto filter_at = line_index(lines, "RelFilter");
  REQUIRE(filter_at != std::string::npos);
  CHECK(lines[filter_at].find("Translated_Review") != std::string::npos);
  CHECK(lines.at(filter_at + 1).rfind("Scan user_reviews", 0) == 0);
  CHECK(line_index(lines, "SemFilter") < filter_at);  // NL filter still present, above

  REQUIRE(report.predicates.size() == 1);
  CHECK(report.predicates[0].verified);
  CHECK(report.predicates[0].applied);

  // Soundness + monotone calls: same rows, fewer semantic calls by the number
  // of 'nan' rows.
  auto baseline = fx.run_plan(plan);
  auto improved = fx.run_plan(optimized);
  CHECK(row_set(baseline.table) == row_set(improved.table));
  CHECK(exec::total_llm_calls(baseline.metrics) == 12);
  CHECK(exec::total_llm_calls(improved.metrics) == 7);
}

TEST_CASE("a join-derived predicate lands above the covering side's scan") {
  llm::MockConfig config;
  config.rules.push_back(deduce_rule("positive", nlohmann::json::array({"r.review != 'nan'"})));
  config.rules.push_back(verify_rule("!= 'nan'", true));
  Fixture fx(config);

  Schema rs{{"", "app", ColumnType::Text}, {"", "review", ColumnType::Text}};
  Table reviews(rs);
  reviews.append_row({std::string("a"), std::string("nan")});
  reviews.append_row({std::string("a"), std::string("fine")});
  reviews.append_row({std::string("b"), std::string("great")});
  fx.cat.register_table("reviews", std::move(reviews));
  Schema ps{{"", "app", ColumnType::Text}, {"", "genre", ColumnType::Text}};
  Table apps(ps);
  apps.append_row({std::string("a"), std::string("game")});
  apps.append_row({std::string("b"), std::string("tool")});
  fx.cat.register_table("apps", std::move(apps));

  auto plan = sql::plan_query(
      "SELECT r.app FROM reviews r JOIN apps a ON r.app = a.app "
      "WHERE s'{r.review} is positive'",
      fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan, {.compression = false});

  auto lines = explain_lines(optimized);
  auto join_at = line_index(lines, "HashJoin");
  auto filter_at = line_index(lines, "RelFilter");
  REQUIRE(join_at != std::string::npos);
  REQUIRE(filter_at != std::string::npos);
  CHECK(filter_at > join_at);  // inside a join branch
  CHECK(lines.at(filter_at + 1).rfind("Scan reviews", 0) == 0);
}

TEST_CASE("apply_pushdown inserts only verified predicates below their source filter") {
  Fixture fx;
  fx.cat.register_table("user_reviews", review_table(5, 2));
  auto plan = sql::plan_query(
      "SELECT app FROM user_reviews WHERE s'{Translated_Review} is real'", fx.cat);

  DeducedPredicate verified;
  verified.sql_text = "Translated_Review != 'nan'";
  verified.verified = true;
  verified.source_template = "{Translated_Review} is real";
  verified.predicate = sql::parse_predicate_text(verified.sql_text);

  DeducedPredicate unverified = verified;
  unverified.sql_text = "Translated_Review != 'Good'";
  unverified.verified = false;
  unverified.predicate = sql::parse_predicate_text(unverified.sql_text);

  std::vector<DeducedPredicate> predicates{verified, unverified};
  auto rewritten = opt::apply_pushdown(plan, predicates);
  CHECK(sql::count_nodes(rewritten, PlanKind::RelFilter) == 1);
  CHECK(predicates[0].applied);
  CHECK_FALSE(predicates[1].applied);

  auto lines = explain_lines(rewritten);
  auto filter_at = line_index(lines, "RelFilter");
  REQUIRE(filter_at != std::string::npos);
  CHECK(lines.at(filter_at + 1).rfind("Scan", 0) == 0);

  // No verified predicates at all: the plan is unchanged.
  std::vector<DeducedPredicate> none{unverified};
  CHECK(sql::explain(opt::apply_pushdown(plan, none)) == sql::explain(plan));
}

TEST_CASE("an entire deduction replaces the filter and preserves the result") {
  llm::MockConfig config;
  nlohmann::json entire = {{"predicates", nlohmann::json::array({"review != 'filler'"})},
                           {"entire", true}};
  config.rules.push_back(deduce_rule("is real", entire));
  config.rules.push_back(verify_rule("filler", true));
  config.rules.push_back(filter_rule("is real", "filler", false));
  Fixture fx(config);

  Schema rs{{"", "app", ColumnType::Text}, {"", "review", ColumnType::Text}};
  Table reviews(rs);
  for (int i = 0; i < 10; ++i) {
    reviews.append_row(
        {fmt::format("app{}", i), std::string(i % 3 == 0 ? "filler" : "substantial")});
  }
  fx.cat.register_table("reviews", std::move(reviews));

  auto plan = sql::plan_query("SELECT app FROM reviews WHERE s'{review} is real'", fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan, {.compression = false});

  CHECK(sql::count_nodes(optimized, PlanKind::SemFilter) == 0);
  CHECK(sql::count_nodes(optimized, PlanKind::RelFilter) == 1);
  REQUIRE(report.predicates.size() == 1);
  CHECK(report.predicates[0].entire);
  CHECK(report.predicates[0].applied);

  auto baseline = fx.run_plan(plan);
  auto improved = fx.run_plan(optimized);
  CHECK(row_set(baseline.table) == row_set(improved.table));
  CHECK(improved.table.row_count() == 6);
  CHECK(exec::total_llm_calls(improved.metrics) == 0);  // fully relational now
}

TEST_CASE("all flags off leaves the plan unchanged and the report empty") {
  Fixture fx;
  fx.cat.register_table("user_reviews", review_table(4, 1));
  auto plan = sql::plan_query(
      "SELECT app FROM user_reviews WHERE s'{Translated_Review} is positive'", fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] =
      optimizer.optimize(plan, {.compression = false, .deduction = false, .rewrites = false});
  CHECK(sql::explain(optimized) == sql::explain(plan));
  CHECK(report.aux_calls == 0);
  CHECK(report.compressions.empty());
  CHECK(report.predicates.empty());
  CHECK(report.notes.empty());
  CHECK(fx.upstream() == 0);
}

TEST_CASE("deduction is skipped when a placeholder has no base column") {
  Fixture fx;
  fx.cat.register_table("reviews", alpha_corpus());
  auto plan = sql::plan_query(
      "SELECT * FROM (SELECT app, s'strength of {review}' AS strength FROM reviews) q "
      "WHERE s'{q.strength} is high'",
      fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan, {.compression = false, .rewrites = false});
  CHECK(report.aux_calls == 0);  // no deduction call was made
  REQUIRE(report.notes.size() == 1);
  CHECK(report.notes[0].find("no base-table statistics") != std::string::npos);
  CHECK(sql::explain(optimized) == sql::explain(plan));
}

TEST_CASE("auxiliary calls stay within the 2k + (k + m) budget and reconcile with accounting") {
  llm::MockConfig config;
  config.rules.push_back(deduce_rule("ok", nlohmann::json::array({"review != 'nan'"})));
  config.rules.push_back(deduce_rule("fine", nlohmann::json::array({"app != 'nan'"})));
  config.rules.push_back(verify_rule("", true));
  Fixture fx(config);
  fx.cat.register_table("reviews", alpha_corpus());

  auto plan = sql::plan_query(
      "SELECT s'{review} label' AS lab FROM reviews WHERE s'{review} ok' AND s'{app} fine'",
      fx.cat);
  const int k = 2;
  const int m = 1;
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan);

  CHECK(report.aux_calls == 7);  // 3 compressions + 2 deductions + 2 verifications
  CHECK(report.aux_calls <= 2 * k + (k + m));
  CHECK(report.compressions.size() == 3);

  auto accounting = fx.gateway.accounting();
  CHECK(accounting.upstream_calls + accounting.cache_hits == report.aux_calls);
  CHECK(accounting.usage.input_tokens == report.aux_usage.input_tokens);
  CHECK(accounting.usage.output_tokens == report.aux_usage.output_tokens);

  // Default-oracle deduction answers an empty list, which costs no
  // verification call: 3 compressions + 2 deductions only.
  Fixture plain;
  plain.cat.register_table("reviews", alpha_corpus());
  Optimizer plain_optimizer(plain.cat, plain.gateway);
  auto [unused, plain_report] = plain_optimizer.optimize(plan);
  CHECK(plain_report.aux_calls == 5);
}

TEST_CASE("an independent filter over a subquery sinks below the projection") {
  llm::MockConfig config;
  config.rules.push_back(filter_rule("is positive", "alpha", true));
  config.rules.push_back(filter_rule("is positive", "", false));
  Fixture fx(config);
  fx.cat.register_table("reviews", alpha_corpus());

  auto plan = sql::plan_query(
      "SELECT * FROM (SELECT app, review, s'strength of {review}' AS strength FROM reviews) q "
      "WHERE s'{q.review} is positive'",
      fx.cat);
  auto optimized = opt::standard_rewrites(plan);

  auto lines = explain_lines(optimized);
  auto proj_at = line_index(lines, "SemProj");
  auto filter_at = line_index(lines, "SemFilter");
  REQUIRE(proj_at != std::string::npos);
  REQUIRE(filter_at != std::string::npos);
  CHECK(filter_at == proj_at + 1);  // filter now directly feeds the projection
  CHECK(lines[filter_at].find("{review} is positive") != std::string::npos);  // remapped
  CHECK(lines.at(filter_at + 1).rfind("Scan", 0) == 0);

  // Filter-first mixed pipeline: |T| + s|T| calls unfused, |T| fused.
  auto unfused = fx.run_plan(optimized);
  CHECK(exec::total_llm_calls(unfused.metrics) == 130);
  CHECK(unfused.table.row_count() == 30);

  fx.options.fusion = true;
  auto fused = fx.run_plan(optimized);
  CHECK(exec::total_llm_calls(fused.metrics) == 100);
  CHECK(row_set(fused.table) == row_set(unfused.table));
}

TEST_CASE("a dependent filter sinks to the projection it consumes and fuses") {
  llm::MockConfig config;
  config.rules.push_back(filter_rule("is high", "strong", true));
  config.rules.push_back(filter_rule("is high", "", false));
  llm::MockRule strength;
  strength.kind = "proj";
  strength.template_contains = "strength of";
  strength.value_contains = "alpha";
  strength.action = "const";
  strength.text = "strong";
  config.rules.push_back(strength);
  llm::MockRule weak;
  weak.kind = "proj";
  weak.template_contains = "strength of";
  weak.action = "const";
  weak.text = "weak";
  config.rules.push_back(weak);
  Fixture fx(config);
  fx.cat.register_table("reviews", alpha_corpus());

  auto plan = sql::plan_query(
      "SELECT * FROM (SELECT app, s'strength of {review}' AS strength FROM reviews) q "
      "WHERE s'{q.strength} is high'",
      fx.cat);
  auto optimized = opt::standard_rewrites(plan);

  auto lines = explain_lines(optimized);
  auto filter_at = line_index(lines, "SemFilter");
  REQUIRE(filter_at != std::string::npos);
  CHECK(lines[filter_at].find("{strength} is high") != std::string::npos);
  CHECK(lines.at(filter_at + 1).rfind("SemProj", 0) == 0);  // stops above its producer

  // Dependent projection-then-filter: 2|T| unfused, |T| fused.
  auto unfused = fx.run_plan(optimized);
  CHECK(exec::total_llm_calls(unfused.metrics) == 200);
  CHECK(unfused.table.row_count() == 30);

  fx.options.fusion = true;
  auto fused = fx.run_plan(optimized);
  CHECK(exec::total_llm_calls(fused.metrics) == 100);
  CHECK(row_set(fused.table) == row_set(unfused.table));
}

TEST_CASE("relational conjuncts sink through joins to the covering side") {
  Fixture fx;
  Schema rs{{"", "app", ColumnType::Text},
            {"", "review", ColumnType::Text},
            {"", "rating", ColumnType::Int64}};
  Table reviews(rs);
  reviews.append_row({std::string("a"), std::string("x"), std::int64_t(1)});
  reviews.append_row({std::string("b"), std::string("y"), std::int64_t(4)});
  fx.cat.register_table("reviews", std::move(reviews));
  Schema ps{{"", "app", ColumnType::Text}, {"", "genre", ColumnType::Text}};
  Table apps(ps);
  apps.append_row({std::string("a"), std::string("game")});
  apps.append_row({std::string("b"), std::string("tool")});
  fx.cat.register_table("apps", std::move(apps));

  auto plan = sql::plan_query(
      "SELECT r.app FROM reviews r JOIN apps a ON r.app = a.app "
      "WHERE r.rating > 2 AND s'{r.review} is positive'",
      fx.cat);
  auto optimized = opt::standard_rewrites(plan);

  auto lines = explain_lines(optimized);
  auto join_at = line_index(lines, "HashJoin");
  auto rel_at = line_index(lines, "RelFilter");
  REQUIRE(join_at != std::string::npos);
  REQUIRE(rel_at != std::string::npos);
  CHECK(rel_at > join_at);
  CHECK(lines.at(rel_at + 1).rfind("Scan reviews", 0) == 0);

  auto baseline = fx.run_plan(plan);
  auto improved = fx.run_plan(optimized);
  CHECK(row_set(baseline.table) == row_set(improved.table));
  CHECK(exec::total_llm_calls(improved.metrics) <= exec::total_llm_calls(baseline.metrics));
}

TEST_CASE("swapping consecutive semantic filters does not change the result") {
  llm::MockConfig config;
  config.rules.push_back(filter_rule("mentions alpha", "alpha", true));
  config.rules.push_back(filter_rule("mentions alpha", "", false));
  config.rules.push_back(filter_rule("low index", "note 00", true));
  config.rules.push_back(filter_rule("low index", "", false));
  Fixture fx(config);
  fx.cat.register_table("reviews", alpha_corpus());

  auto forward = fx.run_plan(sql::plan_query(
      "SELECT app FROM reviews WHERE s'{review} mentions alpha' AND s'{review} low index'",
      fx.cat));
  auto backward = fx.run_plan(sql::plan_query(
      "SELECT app FROM reviews WHERE s'{review} low index' AND s'{review} mentions alpha'",
      fx.cat));
  CHECK(row_set(forward.table) == row_set(backward.table));
  CHECK(forward.table.row_count() == 10);  // notes 000-009 carry alpha
}

TEST_CASE("compression covers every semantic node kind") {
  Fixture fx;
  fx.cat.register_table("reviews", alpha_corpus());
  auto plan = sql::plan_query(
      "SELECT app, sem_agg(s'summarize {review}') AS digest FROM reviews "
      "WHERE s'{review} is ok' GROUP BY app ORDER BY s'shorter digests first' LIMIT 3",
      fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan, {.deduction = false, .rewrites = false});
  CHECK(report.compressions.size() == sql::count_semantic_nodes(plan));
  CHECK(report.compressions.size() == 3);
}

TEST_CASE("the optimizer report serializes its full contents") {
  llm::MockConfig config;
  config.rules.push_back(
      deduce_rule("positive", nlohmann::json::array({"Translated_Review != 'nan'"})));
  config.rules.push_back(verify_rule("!= 'nan'", true));
  Fixture fx(config);
  fx.cat.register_table("user_reviews", review_table(6, 2));
  auto plan = sql::plan_query(
      "SELECT app FROM user_reviews WHERE s'{Translated_Review} is positive'", fx.cat);
  Optimizer optimizer(fx.cat, fx.gateway);
  auto [optimized, report] = optimizer.optimize(plan);

  auto doc = report.to_json();
  CHECK(doc["aux_calls"].get<std::int64_t>() == report.aux_calls);
  REQUIRE(doc["compressions"].size() == 1);
  CHECK(doc["compressions"][0]["accepted"].get<bool>());
  REQUIRE(doc["predicates"].size() == 1);
  CHECK(doc["predicates"][0]["sql_text"].get<std::string>() == "Translated_Review != 'nan'");
  CHECK(doc["predicates"][0]["verified"].get<bool>());
  CHECK(doc["aux_usage"]["input_tokens"].get<std::int64_t>() > 0);
}
