#pragma once

#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "semq/llm/provider.hpp"

namespace semq::llm {

struct GatewayConfig {
  bool cache_enabled = true;
  int max_attempts = 3;
  std::vector<double> backoff_ms = {500.0, 1000.0, 2000.0};
  // Scales the real sleep between attempts; the recorded schedule in the
  // accounting is always unscaled. Tests set 0 to assert the schedule
  // without waiting.
  double backoff_scale = 1.0;
};

struct SessionAccounting {
  std::int64_t upstream_calls = 0;
  std::int64_t cache_hits = 0;
  TokenUsage usage;          // sum over non-cached responses only
  double latency_ms = 0.0;   // provider-reported, non-cached responses only
  std::vector<double> retry_sleeps_ms;  // diagnostic: unscaled backoff schedule taken
};

// Front door for all model access: retry with exponential backoff, response
// caching keyed on the request identity, single-flight de-duplication of
// concurrent identical requests, and session token accounting.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayConfig config = {});

  // Uncached completion (still retried and accounted). Adaptive exploration
  // uses this path so repeated evaluations keep honest per-path costs.
  LlmResponse complete(const LlmRequest& request);

  // Cached completion: a hit returns the stored response with from_cache set
  // and adds no upstream usage; concurrent identical misses collapse into a
  // single upstream call.
  LlmResponse cached_complete(const LlmRequest& request);

  SessionAccounting accounting() const;
  void reset_accounting();
  void clear_cache();

  Provider& provider() { return *provider_; }

 private:
  LlmResponse complete_with_retry(const LlmRequest& request);
  void record(const LlmResponse& response);

  std::shared_ptr<Provider> provider_;
  GatewayConfig config_;

  mutable std::mutex mutex_;
  SessionAccounting accounting_;
  std::unordered_map<std::string, LlmResponse> cache_;
  std::unordered_map<std::string, std::shared_future<LlmResponse>> inflight_;
};

}  // namespace semq::llm
