#pragma once

#include <string>

namespace semq::opt {

// Instruction texts for the auxiliary-LLM optimization passes. Exposed so
// tests and tooling can assert on the exact wording the optimizer sends.

// Chain-of-thought rewrite rules (stop-word removal, active voice,
// placeholder consolidation) with one demonstration per rule.
const std::string& compression_prompt();

// Derives necessary relational preconditions for an NL expression from
// per-column statistics; answers with a JSON array of predicate strings, or
// {"predicates": [...], "entire": true} when the conditions are equivalent.
const std::string& deduction_prompt();

// Judges whether each candidate predicate is a necessary condition of the
// NL expressions; answers with a JSON array of booleans.
const std::string& verification_prompt();

}  // namespace semq::opt
