#pragma once

#include <string>

#include "semq/llm/provider.hpp"

namespace semq::llm {

struct HttpConfig {
  std::string base_url;  // e.g. "http://localhost:8080/v1"
  std::string api_key;   // sent as a bearer token when non-empty
  double timeout_seconds = 60.0;
};

// OpenAI-compatible chat-completions client. POSTs
// {base_url}/chat/completions with {model, messages, temperature}; uses the
// provider's usage report when present and falls back to the ⌈chars/4⌉
// estimate (flagged via usage_estimated) when absent. Latency is measured
// round-trip time. Each call opens its own connection, so concurrent workers
// need no shared locking.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpConfig config);

  LlmResponse complete(const LlmRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  HttpConfig config_;
  std::string host_;         // scheme://host:port
  std::string path_prefix_;  // leading path of base_url, may be empty
};

}  // namespace semq::llm
