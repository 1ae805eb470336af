#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace semq::llm {

// ---------------------------------------------------------------------------
// Response formats
// ---------------------------------------------------------------------------

enum class ResponseFormatKind { FreeText, JsonArray, JsonBool, JsonStringList };

struct ResponseFormat {
  ResponseFormatKind kind = ResponseFormatKind::FreeText;
  std::size_t length_hint = 0;  // JsonArray: exact expected element count (0 = unchecked)

  static ResponseFormat free_text() { return {ResponseFormatKind::FreeText, 0}; }
  static ResponseFormat json_array(std::size_t length_hint) {
    return {ResponseFormatKind::JsonArray, length_hint};
  }
  static ResponseFormat json_bool() { return {ResponseFormatKind::JsonBool, 0}; }
  static ResponseFormat json_string_list() { return {ResponseFormatKind::JsonStringList, 0}; }

  std::string describe() const;
  bool operator==(const ResponseFormat& other) const {
    return kind == other.kind && length_hint == other.length_hint;
  }
};

// ---------------------------------------------------------------------------
// Token usage and pricing
// ---------------------------------------------------------------------------

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
};

struct PricingConfig {
  double input_rate = 0.04;   // currency per million input tokens
  double output_rate = 0.13;  // currency per million output tokens
};

// input_tokens·input_rate/1e6 + output_tokens·output_rate/1e6
double cost(const TokenUsage& usage, const PricingConfig& pricing);

// Loads {"input_rate": x, "output_rate": y} from a JSON file.
PricingConfig load_pricing(const std::string& path);

// ⌈chars/4⌉ — the stable token approximation used by the mock provider and as
// the fallback when a remote provider omits usage data.
std::int64_t estimate_tokens(const std::string& text);

// ---------------------------------------------------------------------------
// Oracle hints
//
// Deterministic routing metadata for the mock provider. Each item describes
// one logical unit inside the request (one tuple of a batch, one tuple pair
// of a join, one group of an aggregate); fused operators contribute multiple
// steps per item. The hints are not part of the request identity (the cache
// key covers only the prompt fields) and remote providers ignore them.
// ---------------------------------------------------------------------------

struct OracleValue {
  std::string text;
  bool from_prev = false;  // substitute the previous step's output at match time

  static OracleValue of(std::string t) { return {std::move(t), false}; }
  static OracleValue prev() { return {"", true}; }
};

struct OracleStep {
  // filter | proj | join | order | agg | compress | deduce | verify | raw
  std::string kind;
  std::string template_key;         // the NL template, placeholders unexpanded
  std::vector<OracleValue> values;  // placeholder values in template order
  int split = -1;                   // join/order: index where the right side begins
};

struct OracleItem {
  std::vector<OracleStep> steps;  // 1 for plain operators, 2 for fused
};

// ---------------------------------------------------------------------------
// Request / response
// ---------------------------------------------------------------------------

struct LlmRequest {
  std::string model;
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  ResponseFormat response_format;

  std::vector<OracleItem> oracle_items;  // mock routing only; excluded from identity
};

struct LlmResponse {
  std::string text;
  // Present iff the response format is structured and parsing + validation
  // succeeded. Parse failures are surfaced via parse_error with the raw text
  // retained so callers can run their fallback.
  std::optional<nlohmann::json> parsed;
  std::string parse_error;
  TokenUsage usage;
  double latency_ms = 0.0;
  bool from_cache = false;
  bool usage_estimated = false;  // usage derived from ⌈chars/4⌉, not provider-reported
};

// Request identity: exactly (model, system_prompt, user_prompt, temperature,
// response_format). Oracle hints are deliberately excluded.
std::string cache_key(const LlmRequest& req);

// Client-side validation of structured output. free_text yields no parsed
// value; json_bool accepts a bare true/false token case-insensitively;
// json_array enforces the element count when length_hint > 0;
// json_string_list requires every element to be a string.
struct ParseOutcome {
  std::optional<nlohmann::json> value;
  std::string error;  // non-empty iff a structured parse failed
};
ParseOutcome parse_structured(const std::string& text, const ResponseFormat& format);

}  // namespace semq::llm
