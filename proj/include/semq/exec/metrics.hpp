#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semq/llm/types.hpp"

namespace semq::exec {

// Per-operator accounting. latency_ms accumulates the provider-reported
// latency of every model call the operator issued (simulated for the mock
// provider, measured round-trip for HTTP); wall_ms is the measured time spent
// inside the operator including pulls from its input.
struct OperatorMetrics {
  std::string label;
  std::int64_t llm_calls = 0;
  llm::TokenUsage usage;
  double latency_ms = 0.0;
  double wall_ms = 0.0;
  std::int64_t rows_in = 0;
  std::int64_t rows_out = 0;
  std::int64_t fallback_batches = 0;
  std::vector<OperatorMetrics> children;

  void absorb_call(const llm::LlmResponse& response) {
    ++llm_calls;
    usage += response.usage;
    latency_ms += response.latency_ms;
  }

  // Folds another metrics record into this one (labels and children untouched).
  void merge_counts(const OperatorMetrics& other) {
    llm_calls += other.llm_calls;
    usage += other.usage;
    latency_ms += other.latency_ms;
    wall_ms += other.wall_ms;
    fallback_batches += other.fallback_batches;
  }
};

nlohmann::json metrics_to_json(const OperatorMetrics& metrics);

// Sums a field across the whole tree.
std::int64_t total_llm_calls(const OperatorMetrics& metrics);
llm::TokenUsage total_usage(const OperatorMetrics& metrics);
double total_latency_ms(const OperatorMetrics& metrics);

}  // namespace semq::exec
