#include "semq/opt/prompts.hpp"

namespace semq::opt {

const std::string& compression_prompt() {
  static const std::string text = R"PROMPT(You rewrite natural-language expressions that are embedded in database queries. An expression contains {column} placeholders that are substituted with field values when the expression is evaluated. Compress the expression so that it keeps exactly the same meaning while using fewer words. Reason step by step through the following rules before answering:
1. Remove stop words and filler phrases that carry no meaning.
   Example: "please check whether the {review} text is actually positive in tone overall" -> "{review} is positive"
2. Simplify sentence structure; prefer active voice over passive voice.
   Example: "the product that is described by {description} is considered to be affordable by most people" -> "{description} describes an affordable product"
3. Consolidate repeated pronoun or field references into a single placeholder mention.
   Example: "{name} is the name of a city and it is a city located in Europe and it is a capital" -> "{name} is a European capital city"
Constraints:
- Keep every distinct placeholder exactly once, in its original order of appearance, spelled exactly as given.
- Never introduce new placeholders.
- The rewritten expression must not be longer than the original.
- Output only the rewritten expression, with no quotes and no explanation.)PROMPT";
  return text;
}

const std::string& deduction_prompt() {
  static const std::string text = R"PROMPT(You are a database optimizer assistant. Your task is to deduce the necessary SQL preconditions (pushdown predicates) for natural language expressions (NLEs), based on the provided column statistics.
An NLE is evaluated by an LLM to determine if a row satisfies a certain condition. Because LLM evaluation is expensive, we want to filter out rows that are guaranteed to be false by executing simple SQL predicates on the CPU first.
IMPORTANT: Your goal is NOT to convert the NLE into an equivalent SQL statement. Instead, you must find the necessary conditions of the NLE predicate given the column statistics.
The provided statistics for each column include:
- whether it is nullable
- the number of distinct values
- the top-5 most frequent values (sampled from a subset of rows)
Steps:
1. Understand the semantic meaning of the NLE.
2. Examine the column statistics, especially the top frequent values.
3. Identify values that definitively violate the NLE predicate.
   For instance, nan, N/A, empty strings, or NULL often represent missing data.
   If the NLE predicate requires a valid or meaningful value, these missing values can be filtered out.
4. Formulate SQL predicates that filter out these violating values.
If you can deduce necessary conditions, output them as a valid JSON array of strings.
Each string must be a valid SQL predicate (e.g., "col != 'nan'").
The final filter will be the logical AND of all strings in the array.
If no meaningful necessary condition can be deduced, simply output an empty array.
Example:
NLE Predicate:
Translated_review is a positive user review
Column stats:
Translated_Review: nullable=true, distinct=10537,
top5=["nan":711, "Good":13, "Negative":10, "Great":6, "Really good":5]
Output:
["Translated_Review != 'nan'", "Translated_Review != 'Negative'"]
Note:
The output MUST be a valid JSON array of strings (or an empty array).
If the deduced conditions are not merely necessary but exactly equivalent to the NLE predicate, output a JSON object {"predicates": [...], "entire": true} instead of the bare array.)PROMPT";
  return text;
}

const std::string& verification_prompt() {
  static const std::string text = R"PROMPT(You are a database optimizer assistant. Your task is to verify whether each candidate SQL predicate is a NECESSARY CONDITION for a set of Natural Language Expressions (NLEs).
Background:
A semantic filter evaluates NLEs (natural language conditions) on each row. Because LLM evaluation is expensive, we pre-filter rows using cheap SQL predicates. A SQL predicate P is a valid pushdown filter only if it is a NECESSARY CONDITION: whenever P is false, the overall NLE filter is guaranteed to be false.
KEY CONCEPT - Necessary vs Sufficient:
For each column, some values make NLE FALSE (set A), some make it TRUE (set B).
- **Necessary (valid)**: "column != value" for values in A. Filtering out violating values is correct.
- **Sufficient (invalid)**: "column = value" or "column IN (...)" for values in B. Whitelisting known-good values is WRONG: it would exclude valid rows whose values are not in the statistics. Output false for such predicates.
Definition of necessary condition:
  SQL predicate P is a necessary condition for NLE set S iff:
  for every possible row, NOT P => (at least one NLE in S is false)
  Equivalently: if a row passes all NLEs, it must also satisfy P.
Given the original NL Expressions and the candidate SQL Predicates, output a JSON array of booleans (same length as the SQL Predicates list):
 - true: the SQL predicate IS a valid necessary condition (typically "column != value" filtering out violating values)
  - false: the SQL predicate is NOT valid (too strict, unrelated to NLEs, or a sufficient condition like "column = value" / "column IN (...)")
Example:
NL Expressions: ["{Review} is a positive and meaningful user review"]
SQL Predicates: ["Review != 'nan'", "Review = 'Good'", "Rating > 10"]
Output: [true, false, false]
(Review != 'nan' is necessary: 'nan' violates the NLE. Review = 'Good' is NOT necessary: it is a sufficient condition that would wrongly exclude other positive reviews. Rating > 10 is unrelated to the NLE.)
Note: Output MUST be a valid JSON array of booleans only.)PROMPT";
  return text;
}

}  // namespace semq::opt
