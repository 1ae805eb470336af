#include "semq/llm/types.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::llm {

std::string ResponseFormat::describe() const {
  switch (kind) {
    case ResponseFormatKind::FreeText:
      return "free_text";
    case ResponseFormatKind::JsonArray:
      return fmt::format("json_array({})", length_hint);
    case ResponseFormatKind::JsonBool:
      return "json_bool";
    case ResponseFormatKind::JsonStringList:
      return "json_string_list";
  }
  return "free_text";
}

double cost(const TokenUsage& usage, const PricingConfig& pricing) {
  return static_cast<double>(usage.input_tokens) * pricing.input_rate / 1e6 +
         static_cast<double>(usage.output_tokens) * pricing.output_rate / 1e6;
}

PricingConfig load_pricing(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open pricing file '{}'", path));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("pricing file '{}': {}", path, e.what()));
  }
  PricingConfig pricing;
  pricing.input_rate = doc.at("input_rate").get<double>();
  pricing.output_rate = doc.at("output_rate").get<double>();
  if (pricing.input_rate < 0 || pricing.output_rate < 0)
    throw ConfigError(fmt::format("pricing file '{}': rates must be >= 0", path));
  return pricing;
}

std::int64_t estimate_tokens(const std::string& text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string cache_key(const LlmRequest& req) {
  return fmt::format("{}\x1f{}\x1f{}\x1f{:.17g}\x1f{}", req.model, req.system_prompt,
                     req.user_prompt, req.temperature, req.response_format.describe());
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_code_fence(const std::string& s) {
  if (s.rfind("```", 0) != 0) return s;
  std::size_t body = s.find('\n');
  if (body == std::string::npos) return s;
  std::size_t tail = s.rfind("```");
  if (tail <= body) return s;
  return trim(s.substr(body + 1, tail - body - 1));
}

std::optional<nlohmann::json> try_parse(const std::string& s) {
  nlohmann::json doc = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  return doc;
}

// Direct parse first; failing that, the outermost opener..closer slice. Models
// often wrap JSON in prose even when told not to.
std::optional<nlohmann::json> extract_json(const std::string& text, char opener, char closer) {
  std::string body = strip_code_fence(trim(text));
  if (auto doc = try_parse(body)) return doc;
  std::size_t b = body.find(opener);
  std::size_t e = body.rfind(closer);
  if (b == std::string::npos || e == std::string::npos || e <= b) return std::nullopt;
  return try_parse(body.substr(b, e - b + 1));
}

}  // namespace

ParseOutcome parse_structured(const std::string& text, const ResponseFormat& format) {
  switch (format.kind) {
    case ResponseFormatKind::FreeText:
      return {std::nullopt, ""};
    case ResponseFormatKind::JsonBool: {
      std::string body = strip_code_fence(trim(text));
      while (!body.empty() && (body.back() == '.' || body.back() == '!')) {
        body = trim(body.substr(0, body.size() - 1));
      }
      std::string lower(body);
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (lower == "true") return {nlohmann::json(true), ""};
      if (lower == "false") return {nlohmann::json(false), ""};
      return {std::nullopt, fmt::format("expected true or false, got '{}'", body)};
    }
    case ResponseFormatKind::JsonArray: {
      auto doc = extract_json(text, '[', ']');
      if (!doc || !doc->is_array()) return {std::nullopt, "expected a JSON array"};
      if (format.length_hint > 0 && doc->size() != format.length_hint) {
        return {std::nullopt, fmt::format("expected {} elements, got {}", format.length_hint,
                                          doc->size())};
      }
      return {std::move(*doc), ""};
    }
    case ResponseFormatKind::JsonStringList: {
      auto doc = extract_json(text, '[', ']');
      if (!doc || !doc->is_array()) return {std::nullopt, "expected a JSON array"};
      for (const auto& element : *doc) {
        if (!element.is_string())
          return {std::nullopt, "expected every array element to be a string"};
      }
      return {std::move(*doc), ""};
    }
  }
  return {std::nullopt, ""};
}

}  // namespace semq::llm
