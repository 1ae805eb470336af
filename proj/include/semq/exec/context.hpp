#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semq/llm/gateway.hpp"

namespace semq::exec {

inline constexpr std::size_t kDefaultChunkCapacity = 2048;
inline constexpr std::size_t kDefaultBatchSize = 16;
inline constexpr std::size_t kDefaultContextBudget = 4096;

struct ExecOptions {
  bool fusion = true;
  bool batching = true;
  std::size_t batch_size = kDefaultBatchSize;
  std::size_t chunk_capacity = kDefaultChunkCapacity;
  std::size_t context_budget = kDefaultContextBudget;  // SemAgg grouping, tokens
  // Adaptive exploration re-evaluates identical prompts on purpose; bypassing
  // the cache keeps per-path cost and latency honest.
  bool bypass_cache = false;
  std::string model = "mock-model";

  // Adaptive execution of consecutive semantic-filter runs (off by default;
  // the static pipeline keeps the documented call-count laws observable).
  bool aqe = false;
  double aqe_delta1 = 1.0 / 32.0;   // expression-exploration fraction
  double aqe_delta2 = 3.0 / 32.0;   // path-exploration fraction
  double aqe_mcc_threshold = 0.5;   // fusion gate on pairwise correlation
  double aqe_acc_threshold = 0.80;  // path-survival gate vs the reference
  bool aqe_cost_first = false;      // objective (latency-first by default)
  bool aqe_plain_accuracy = false;  // score paths by accuracy instead of F1
  llm::PricingConfig pricing;       // converts token usage to monetary cost
};

struct ExecContext {
  llm::Gateway& gateway;
  ExecOptions options;
  // When set, each adaptive filter run appends its trace here.
  std::vector<nlohmann::json>* aqe_traces = nullptr;

  llm::LlmResponse call(const llm::LlmRequest& request) {
    return options.bypass_cache ? gateway.complete(request)
                                : gateway.cached_complete(request);
  }
};

// How a semantic operator issues its calls.
struct CallMode {
  bool batched = false;
  std::size_t batch_size = kDefaultBatchSize;

  static CallMode per_tuple() { return {false, kDefaultBatchSize}; }
  static CallMode batched_of(std::size_t size) { return {true, size}; }
  static CallMode from_options(const ExecOptions& options) {
    return {options.batching, options.batch_size};
  }
};

}  // namespace semq::exec
