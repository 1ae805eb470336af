#include "semq/bench/quality.hpp"

#include <cctype>
#include <set>

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::bench {

QualityReport quality(const std::vector<bool>& predicted, const std::vector<bool>& reference) {
  if (predicted.size() != reference.size()) {
    throw ExecError(fmt::format("quality: selection lengths differ ({} vs {})",
                                predicted.size(), reference.size()));
  }
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && reference[i]) ++tp;
    else if (!predicted[i] && !reference[i]) ++tn;
    else if (predicted[i]) ++fp;
    else ++fn;
  }
  QualityReport report;
  const double n = static_cast<double>(predicted.size());
  report.accuracy = n == 0 ? 1.0 : (tp + tn) / n;
  report.precision = tp + fp == 0 ? 0.0 : tp / (tp + fp);
  report.recall = tp + fn == 0 ? 0.0 : tp / (tp + fn);
  report.f1 = report.precision + report.recall == 0
                  ? 0.0
                  : 2 * report.precision * report.recall / (report.precision + report.recall);
  return report;
}

namespace {

std::set<std::string> token_set(const std::string& text) {
  std::set<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!current.empty()) tokens.insert(current);
      current.clear();
    } else if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.insert(current);
  return tokens;
}

}  // namespace

double word_overlap(const std::string& generated, const std::string& reference) {
  auto ref_tokens = token_set(reference);
  if (ref_tokens.empty()) return 0.0;
  auto gen_tokens = token_set(generated);
  std::size_t shared = 0;
  for (const auto& token : ref_tokens) shared += gen_tokens.count(token);
  return static_cast<double>(shared) / static_cast<double>(ref_tokens.size());
}

}  // namespace semq::bench
