#pragma once

#include <string>

#include "semq/llm/types.hpp"

namespace semq::llm {

class Provider {
 public:
  virtual ~Provider() = default;

  // Performs one model call. Transport failures throw TransportError (the
  // gateway retries); structured-parse failures do not throw — they surface
  // through LlmResponse::parse_error with the raw text retained.
  virtual LlmResponse complete(const LlmRequest& request) = 0;

  virtual std::string name() const = 0;
};

}  // namespace semq::llm
