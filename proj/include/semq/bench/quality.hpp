#pragma once

#include <string>
#include <vector>

namespace semq::bench {

// Confusion-matrix scores of a predicted boolean selection against a
// reference selection. Zero-denominator conventions: precision, recall, and
// F1 are 0 when undefined; accuracy over zero rows is 1.
struct QualityReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Throws ExecError when the vectors differ in length.
QualityReport quality(const std::vector<bool>& predicted, const std::vector<bool>& reference);

// |tokens(generated) ∩ tokens(reference)| / |tokens(reference)| over distinct
// lowercase, punctuation-stripped, whitespace-split tokens; 0 when the
// reference has no tokens.
double word_overlap(const std::string& generated, const std::string& reference);

}  // namespace semq::bench
