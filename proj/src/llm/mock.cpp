#include "semq/llm/mock.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::llm {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool ci_contains(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return true;
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char raw : text) {
    auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

bool shares_word(const std::string& a, const std::string& b) {
  auto left = words_of(a);
  std::set<std::string> right_words;
  for (auto& w : words_of(b)) right_words.insert(std::move(w));
  return std::any_of(left.begin(), left.end(),
                     [&](const std::string& w) { return right_words.count(w) > 0; });
}

std::string join_values(const std::vector<std::string>& values, std::size_t begin,
                        std::size_t end, const char* sep = " ") {
  std::string out;
  for (std::size_t i = begin; i < end && i < values.size(); ++i) {
    if (!out.empty()) out += sep;
    out += values[i];
  }
  return out;
}

std::string first_words(const std::string& text, int count) {
  std::istringstream in(text);
  std::string word;
  std::string out;
  for (int i = 0; i < count && (in >> word); ++i) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

struct StepResult {
  nlohmann::json value;
  double latency_ms = 0.0;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
};

bool rule_matches(const MockRule& rule, const OracleStep& step,
                  const std::vector<std::string>& values) {
  if (rule.kind != step.kind) return false;
  if (!rule.template_contains.empty() &&
      !ci_contains(step.template_key, rule.template_contains))
    return false;
  if (rule.template_regex && !std::regex_search(step.template_key, *rule.template_regex))
    return false;

  auto value_holds = [&](auto&& predicate) {
    if (rule.value_index >= 0) {
      auto index = static_cast<std::size_t>(rule.value_index);
      return index < values.size() && predicate(values[index]);
    }
    return std::any_of(values.begin(), values.end(), predicate);
  };
  if (!rule.value_contains.empty() &&
      !value_holds([&](const std::string& v) { return ci_contains(v, rule.value_contains); }))
    return false;
  if (rule.value_regex &&
      !value_holds([&](const std::string& v) { return std::regex_search(v, *rule.value_regex); }))
    return false;
  return true;
}

std::string run_text_action(const MockRule* rule, const std::string& fallback_action,
                            const OracleStep& step, const std::vector<std::string>& values) {
  std::string action = rule && !rule->action.empty() ? rule->action : fallback_action;
  std::string joined = join_values(values, 0, values.size());
  if (action == "const") return rule ? rule->text : "";
  if (action == "echo") return step.kind == "compress" ? step.template_key : joined;
  if (action == "upper") {
    std::transform(joined.begin(), joined.end(), joined.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return joined;
  }
  if (action == "lower") return to_lower(joined);
  if (action == "first_value") return values.empty() ? "" : values.front();
  if (action == "echo_words") return first_words(joined, rule ? rule->count : 3);
  if (action == "regex_capture") {
    std::smatch match;
    if (rule && std::regex_search(joined, match, std::regex(rule->pattern))) {
      return match.size() > 1 ? match[1].str() : match[0].str();
    }
    return "";
  }
  if (action == "count_summary") return fmt::format("summary of {} items", values.size());
  return joined;
}

bool run_order_action(const MockRule* rule, const OracleStep& step,
                      const std::vector<std::string>& values) {
  if (rule && rule->verdict) return *rule->verdict;
  std::size_t split = step.split >= 0 ? static_cast<std::size_t>(step.split)
                                      : values.size() / 2;
  std::string a = join_values(values, 0, split);
  std::string b = join_values(values, split, values.size());
  std::string action = rule && !rule->action.empty() ? rule->action : "lex";
  if (action == "shorter_first") return a.size() != b.size() ? a.size() < b.size() : a <= b;
  if (action == "longer_first") return a.size() != b.size() ? a.size() > b.size() : a <= b;
  return a <= b;  // lex
}

}  // namespace

MockConfig MockProvider::config_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> kKinds = {"filter", "proj",     "join",   "order", "agg",
                                               "compress", "deduce", "verify", "raw"};
  static const std::set<std::string> kActions = {
      "const",      "echo",       "upper",         "lower",        "first_value",
      "echo_words", "regex_capture", "count_summary", "shares_word", "shorter_first",
      "longer_first", "lex"};
  static const std::set<std::string> kSabotage = {"none", "truncate_first", "corrupt_all"};

  MockConfig config;
  config.base_latency_ms = doc.value("base_latency_ms", config.base_latency_ms);
  if (doc.contains("batch")) {
    const auto& batch = doc.at("batch");
    config.batch.overhead_ms = batch.value("overhead_ms", config.batch.overhead_ms);
    config.batch.item_latency_factor =
        batch.value("item_latency_factor", config.batch.item_latency_factor);
    config.batch.sabotage = batch.value("sabotage", config.batch.sabotage);
    if (!kSabotage.count(config.batch.sabotage))
      throw ConfigError(fmt::format("mock oracle: unknown sabotage mode '{}'",
                                    config.batch.sabotage));
  }
  for (const auto& entry : doc.value("rules", nlohmann::json::array())) {
    MockRule rule;
    rule.kind = entry.at("kind").get<std::string>();
    if (!kKinds.count(rule.kind))
      throw ConfigError(fmt::format("mock oracle: unknown rule kind '{}'", rule.kind));
    rule.template_contains = entry.value("template_contains", "");
    rule.value_contains = entry.value("value_contains", "");
    rule.value_index = entry.value("value_index", -1);
    try {
      if (entry.contains("template_regex"))
        rule.template_regex = std::regex(entry.at("template_regex").get<std::string>());
      if (entry.contains("value_regex"))
        rule.value_regex = std::regex(entry.at("value_regex").get<std::string>());
    } catch (const std::regex_error& e) {
      throw ConfigError(fmt::format("mock oracle: bad regex in rule: {}", e.what()));
    }
    if (entry.contains("verdict")) {
      const auto& verdict = entry.at("verdict");
      if (verdict.is_boolean()) {
        rule.verdict = verdict.get<bool>();
      } else {
        rule.verdict_json = verdict;
      }
    }
    rule.action = entry.value("action", "");
    if (!rule.action.empty() && !kActions.count(rule.action))
      throw ConfigError(fmt::format("mock oracle: unknown action '{}'", rule.action));
    rule.text = entry.value("text", "");
    rule.count = entry.value("count", 3);
    rule.pattern = entry.value("pattern", "");
    if (entry.contains("latency_ms")) rule.latency_ms = entry.at("latency_ms").get<double>();
    if (entry.contains("input_tokens"))
      rule.input_tokens = entry.at("input_tokens").get<std::int64_t>();
    if (entry.contains("output_tokens"))
      rule.output_tokens = entry.at("output_tokens").get<std::int64_t>();
    config.rules.push_back(std::move(rule));
  }
  return config;
}

std::shared_ptr<MockProvider> MockProvider::from_json(const nlohmann::json& doc) {
  return std::make_shared<MockProvider>(config_from_json(doc));
}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open mock oracle file '{}'", path));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("mock oracle file '{}': {}", path, e.what()));
  }
  return from_json(doc);
}

namespace {

// Well-formed but wrong: negate booleans, garble strings, recurse into the
// fused per-tuple objects. Nulls stay null so array shapes survive.
nlohmann::json corrupt_value(const nlohmann::json& value) {
  if (value.is_boolean()) return !value.get<bool>();
  if (value.is_string()) return "%%corrupted%%";
  if (value.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, field] : value.items()) out[key] = corrupt_value(field);
    return out;
  }
  if (value.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& element : value) out.push_back(corrupt_value(element));
    return out;
  }
  return value;
}

}  // namespace

LlmResponse MockProvider::complete(const LlmRequest& request) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
  }

  std::vector<OracleItem> items = request.oracle_items;
  if (items.empty()) {
    OracleItem raw;
    raw.steps.push_back({"raw", request.user_prompt, {OracleValue::of(request.user_prompt)}, -1});
    items.push_back(std::move(raw));
  }

  const bool want_bool = request.response_format.kind == ResponseFormatKind::JsonBool;

  std::vector<nlohmann::json> item_values;
  double latency_sum = 0.0;
  double latency_max = 0.0;
  bool all_input_override = true;
  bool all_output_override = true;
  std::int64_t input_override = 0;
  std::int64_t output_override = 0;

  for (const auto& item : items) {
    nlohmann::json object = nlohmann::json::object();
    nlohmann::json single;
    std::string prev_text;
    bool short_circuited = false;
    double item_latency = 0.0;

    for (std::size_t s = 0; s < item.steps.size(); ++s) {
      const OracleStep& step = item.steps[s];
      std::string field = fmt::format("step{}", s + 1);
      if (short_circuited) {
        object[field] = nullptr;
        continue;
      }

      std::vector<std::string> values;
      values.reserve(step.values.size());
      for (const auto& value : step.values) values.push_back(value.from_prev ? prev_text : value.text);

      const MockRule* rule = nullptr;
      for (const auto& candidate : config_.rules) {
        if (rule_matches(candidate, step, values)) {
          rule = &candidate;
          break;
        }
      }

      StepResult result;
      result.latency_ms = rule && rule->latency_ms ? *rule->latency_ms : config_.base_latency_ms;
      if (rule) {
        result.input_tokens = rule->input_tokens;
        result.output_tokens = rule->output_tokens;
      }

      if (step.kind == "filter" || step.kind == "verify") {
        bool verdict = rule && rule->verdict ? *rule->verdict
                       : step.kind == "verify"
                           ? false
                           : std::any_of(values.begin(), values.end(),
                                         [](const std::string& v) { return !v.empty(); });
        result.value = verdict;
      } else if (step.kind == "join") {
        if (rule && rule->verdict) {
          result.value = *rule->verdict;
        } else {
          std::size_t split = step.split >= 0 ? static_cast<std::size_t>(step.split)
                                              : values.size() / 2;
          result.value = shares_word(join_values(values, 0, split),
                                     join_values(values, split, values.size()));
        }
      } else if (step.kind == "order") {
        result.value = run_order_action(rule, step, values);
      } else if (step.kind == "deduce") {
        result.value = rule && rule->verdict_json ? *rule->verdict_json
                                                  : nlohmann::json::array();
      } else if (step.kind == "raw") {
        if (rule && rule->verdict) {
          result.value = *rule->verdict;
        } else if (rule || !want_bool) {
          result.value = run_text_action(rule, "echo", step, values);
        } else {
          result.value = !join_values(values, 0, values.size()).empty();
        }
      } else {  // proj | agg | compress
        std::string fallback = step.kind == "agg" ? "count_summary" : "echo";
        result.value = run_text_action(rule, fallback, step, values);
      }

      prev_text = result.value.is_string() ? result.value.get<std::string>()
                                           : result.value.dump();
      item_latency = std::max(item_latency, result.latency_ms);
      if (result.input_tokens) {
        input_override += *result.input_tokens;
      } else {
        all_input_override = false;
      }
      if (result.output_tokens) {
        output_override += *result.output_tokens;
      } else {
        all_output_override = false;
      }

      if (item.steps.size() == 1) {
        single = result.value;
      } else {
        object[field] = result.value;
        if (s == 0 && step.kind == "filter" && result.value.is_boolean() &&
            !result.value.get<bool>()) {
          short_circuited = true;
        }
      }
    }

    item_values.push_back(item.steps.size() == 1 ? single : object);
    latency_sum += item_latency;
    latency_max = std::max(latency_max, item_latency);
  }

  LlmResponse response;
  switch (request.response_format.kind) {
    case ResponseFormatKind::JsonArray: {
      nlohmann::json array = nlohmann::json::array();
      for (const auto& value : item_values) array.push_back(value);
      if (config_.batch.sabotage == "corrupt_all") {
        array = corrupt_value(array);
      } else if (config_.batch.sabotage == "truncate_first" && !array.empty()) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!truncated_once_) {
          truncated_once_ = true;
          array.erase(array.size() - 1);
        }
      }
      response.text = array.dump();
      break;
    }
    case ResponseFormatKind::JsonBool:
    case ResponseFormatKind::JsonStringList:
    case ResponseFormatKind::FreeText: {
      const nlohmann::json& value = item_values.front();
      response.text = value.is_string() ? value.get<std::string>() : value.dump();
      break;
    }
  }

  if (items.size() > 1) {
    response.latency_ms =
        config_.batch.overhead_ms + config_.batch.item_latency_factor * latency_sum;
  } else {
    response.latency_ms = latency_max;
  }

  if (items.size() == 1 && all_input_override) {
    response.usage.input_tokens = input_override;
  } else {
    response.usage.input_tokens =
        estimate_tokens(request.system_prompt) + estimate_tokens(request.user_prompt);
  }
  if (items.size() == 1 && all_output_override) {
    response.usage.output_tokens = output_override;
  } else {
    response.usage.output_tokens = estimate_tokens(response.text);
  }

  auto outcome = parse_structured(response.text, request.response_format);
  response.parsed = std::move(outcome.value);
  response.parse_error = std::move(outcome.error);
  return response;
}

std::int64_t MockProvider::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

void MockProvider::reset_calls() {
  std::lock_guard<std::mutex> lock(mutex_);
  calls_ = 0;
}

}  // namespace semq::llm
