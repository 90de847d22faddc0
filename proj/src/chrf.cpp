#include "tabeval/chrf.hpp"

#include <map>
#include <string>

#include "tabeval/text.hpp"

namespace tabeval {

namespace {

std::u32string strip_spaces(std::string_view s) {
  std::u32string out;
  for (char32_t c : text::decode_utf8(s)) {
    if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0xA0) continue;
    out.push_back(c);
  }
  return out;
}

std::map<std::u32string, int> ngram_counts(const std::u32string& s, std::size_t n) {
  std::map<std::u32string, int> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

}  // namespace

double chrf(std::string_view hypothesis, std::string_view reference, const ChrfParams& params) {
  const auto hyp = strip_spaces(hypothesis);
  const auto ref = strip_spaces(reference);
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;

  double precision_sum = 0.0, recall_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= params.max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    if (hyp.size() < order || ref.size() < order) continue;
    const auto h = ngram_counts(hyp, order);
    const auto r = ngram_counts(ref, order);
    long matches = 0;
    for (const auto& [gram, count] : h) {
      auto it = r.find(gram);
      if (it != r.end()) matches += std::min(count, it->second);
    }
    precision_sum += static_cast<double>(matches) / static_cast<double>(hyp.size() - order + 1);
    recall_sum += static_cast<double>(matches) / static_cast<double>(ref.size() - order + 1);
    ++orders;
  }
  const double p = precision_sum / orders;
  const double r = recall_sum / orders;
  if (p == 0.0 && r == 0.0) return 0.0;
  const double b2 = params.beta * params.beta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

}  // namespace tabeval
