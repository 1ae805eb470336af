#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semq/llm/provider.hpp"

namespace semq::llm {

// One entry of the deterministic oracle's ordered rule list. A rule applies
// to a single oracle step when its kind matches and every stated condition
// holds; the first applicable rule wins. The rule set is total: built-in
// per-kind defaults answer steps no rule matches.
struct MockRule {
  std::string kind;  // filter | proj | join | order | agg | compress | deduce | verify | raw

  // Conditions (all present ones must hold; substring checks are case-insensitive).
  std::string template_contains;
  std::string value_contains;
  std::optional<std::regex> template_regex;
  std::optional<std::regex> value_regex;
  int value_index = -1;  // restrict value conditions to one slot (-1 = any)

  // Outcome for boolean kinds (filter/join/verify) and for order when set
  // (true = first argument ranks first).
  std::optional<bool> verdict;
  // Outcome for deduce: an array of predicate strings, or an object
  // {"predicates": [...], "entire": true}.
  std::optional<nlohmann::json> verdict_json;
  // Outcome for text kinds (proj/agg/compress/raw) and comparator policies
  // for order: const | echo | upper | lower | first_value | echo_words |
  // regex_capture | count_summary | shares_word | shorter_first |
  // longer_first | lex.
  std::string action;
  std::string text;     // const payload
  int count = 3;        // echo_words word budget
  std::string pattern;  // regex_capture pattern

  std::optional<double> latency_ms;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
};

struct MockBatchConfig {
  double overhead_ms = 20.0;
  double item_latency_factor = 1.0;
  // none: honest answers. truncate_first: the first array response loses its
  // last element (a length violation the engine must repair per-tuple).
  // corrupt_all: every array response stays well-formed but carries wrong
  // payloads (booleans negated, strings garbled) — parseable yet inaccurate.
  std::string sabotage = "none";
};

struct MockConfig {
  double base_latency_ms = 10.0;
  MockBatchConfig batch;
  std::vector<MockRule> rules;
};

// Deterministic oracle provider: at temperature 0 the response is a pure
// function of the request (rule list + built-in defaults), with simulated
// latency (never slept) and ⌈chars/4⌉ token accounting.
class MockProvider : public Provider {
 public:
  MockProvider() = default;
  explicit MockProvider(MockConfig config) : config_(std::move(config)) {}

  static MockConfig config_from_json(const nlohmann::json& doc);
  static std::shared_ptr<MockProvider> from_json(const nlohmann::json& doc);
  static std::shared_ptr<MockProvider> from_file(const std::string& path);

  LlmResponse complete(const LlmRequest& request) override;
  std::string name() const override { return "mock"; }

  const MockConfig& config() const { return config_; }

  // Upstream-call counter for cache/single-flight tests.
  std::int64_t calls() const;
  void reset_calls();

 private:
  MockConfig config_;
  mutable std::mutex mutex_;
  std::int64_t calls_ = 0;
  bool truncated_once_ = false;
};

}  // namespace semq::llm
