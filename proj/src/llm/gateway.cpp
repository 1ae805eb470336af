#include "semq/llm/gateway.hpp"

#include <chrono>
#include <thread>

#include "semq/common.hpp"

namespace semq::llm {

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(std::move(config)) {
  if (!provider_) throw ConfigError("gateway requires a provider");
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

void Gateway::record(const LlmResponse& response) {
  std::lock_guard<std::mutex> lock(mutex_);
  ++accounting_.upstream_calls;
  accounting_.usage += response.usage;
  accounting_.latency_ms += response.latency_ms;
}

LlmResponse Gateway::complete_with_retry(const LlmRequest& request) {
  for (int attempt = 0;; ++attempt) {
    try {
      LlmResponse response = provider_->complete(request);
      record(response);
      return response;
    } catch (const TransportError&) {
      if (attempt + 1 >= config_.max_attempts) throw;
      double sleep_ms = config_.backoff_ms.empty()
                            ? 0.0
                            : config_.backoff_ms[std::min<std::size_t>(
                                  attempt, config_.backoff_ms.size() - 1)];
      {
        std::lock_guard<std::mutex> lock(mutex_);
        accounting_.retry_sleeps_ms.push_back(sleep_ms);
      }
      double scaled = sleep_ms * config_.backoff_scale;
      if (scaled > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(scaled));
    }
  }
}

LlmResponse Gateway::complete(const LlmRequest& request) {
  return complete_with_retry(request);
}

LlmResponse Gateway::cached_complete(const LlmRequest& request) {
  if (!config_.cache_enabled) return complete_with_retry(request);

  const std::string key = cache_key(request);
  std::shared_future<LlmResponse> waiter;
  std::promise<LlmResponse> promise;
  bool leader = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto hit = cache_.find(key);
    if (hit != cache_.end()) {
      LlmResponse response = hit->second;
      response.from_cache = true;
      ++accounting_.cache_hits;
      return response;
    }
    auto flight = inflight_.find(key);
    if (flight != inflight_.end()) {
      waiter = flight->second;
    } else {
      leader = true;
      inflight_.emplace(key, promise.get_future().share());
    }
  }

  if (!leader) {
    LlmResponse response = waiter.get();  // rethrows the leader's failure
    response.from_cache = true;
    std::lock_guard<std::mutex> lock(mutex_);
    ++accounting_.cache_hits;
    return response;
  }

  try {
    LlmResponse response = complete_with_retry(request);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cache_.emplace(key, response);
      inflight_.erase(key);
    }
    promise.set_value(response);
    return response;
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      inflight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

SessionAccounting Gateway::accounting() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return accounting_;
}

void Gateway::reset_accounting() {
  std::lock_guard<std::mutex> lock(mutex_);
  accounting_ = SessionAccounting{};
}

void Gateway::clear_cache() {
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.clear();
}

}  // namespace semq::llm
