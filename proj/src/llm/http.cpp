#include "semq/llm/http.hpp"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semq/common.hpp"

namespace semq::llm {

HttpProvider::HttpProvider(HttpConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError(fmt::format("base url '{}' must include a scheme", url));
  std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = url;
  } else {
    host_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

LlmResponse HttpProvider::complete(const LlmRequest& request) {
  nlohmann::json body = {
      {"model", request.model},
      {"messages",
       {{{"role", "system"}, {"content", request.system_prompt}},
        {{"role", "user"}, {"content", request.user_prompt}}}},
      {"temperature", request.temperature},
  };

  httplib::Client client(host_);
  auto timeout = std::chrono::milliseconds(
      static_cast<long long>(config_.timeout_seconds * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", fmt::format("Bearer {}", config_.api_key));

  std::string path = path_prefix_ + "/chat/completions";
  auto start = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(path, headers, body.dump(), "application/json");
  auto elapsed = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();

  if (!result)
    throw TransportError(fmt::format("POST {}{} failed: {}", host_, path,
                                     httplib::to_string(result.error())));
  if (result->status != 200)
    throw TransportError(fmt::format("POST {}{} returned HTTP {}: {}", host_, path,
                                     result->status, result->body.substr(0, 200)));

  nlohmann::json doc = nlohmann::json::parse(result->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    throw TransportError(fmt::format("malformed completion response: {}",
                                     result->body.substr(0, 200)));
  const auto& message = doc["choices"][0].value("message", nlohmann::json::object());
  if (!message.contains("content") || !message["content"].is_string())
    throw TransportError("completion response is missing message content");

  LlmResponse response;
  response.text = message["content"].get<std::string>();
  response.latency_ms = elapsed;
  if (doc.contains("usage") && doc["usage"].contains("prompt_tokens") &&
      doc["usage"].contains("completion_tokens")) {
    response.usage.input_tokens = doc["usage"]["prompt_tokens"].get<std::int64_t>();
    response.usage.output_tokens = doc["usage"]["completion_tokens"].get<std::int64_t>();
  } else {
    response.usage.input_tokens =
        estimate_tokens(request.system_prompt) + estimate_tokens(request.user_prompt);
    response.usage.output_tokens = estimate_tokens(response.text);
    response.usage_estimated = true;
  }

  auto outcome = parse_structured(response.text, request.response_format);
  response.parsed = std::move(outcome.value);
  response.parse_error = std::move(outcome.error);
  return response;
}

}  // namespace semq::llm
