#include "semq/exec/metrics.hpp"

namespace semq::exec {

nlohmann::json metrics_to_json(const OperatorMetrics& metrics) {
  nlohmann::json node = {
      {"operator", metrics.label},
      {"llm_calls", metrics.llm_calls},
      {"input_tokens", metrics.usage.input_tokens},
      {"output_tokens", metrics.usage.output_tokens},
      {"latency_ms", metrics.latency_ms},
      {"wall_ms", metrics.wall_ms},
      {"rows_in", metrics.rows_in},
      {"rows_out", metrics.rows_out},
  };
  if (metrics.fallback_batches > 0) node["fallback_batches"] = metrics.fallback_batches;
  if (!metrics.children.empty()) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& child : metrics.children) children.push_back(metrics_to_json(child));
    node["children"] = std::move(children);
  }
  return node;
}

std::int64_t total_llm_calls(const OperatorMetrics& metrics) {
  std::int64_t total = metrics.llm_calls;
  for (const auto& child : metrics.children) total += total_llm_calls(child);
  return total;
}

llm::TokenUsage total_usage(const OperatorMetrics& metrics) {
  llm::TokenUsage total = metrics.usage;
  for (const auto& child : metrics.children) total += total_usage(child);
  return total;
}

double total_latency_ms(const OperatorMetrics& metrics) {
  double total = metrics.latency_ms;
  for (const auto& child : metrics.children) total += total_latency_ms(child);
  return total;
}

}  // namespace semq::exec
