#pragma once

#include <string_view>

namespace tabeval {

struct ChrfParams {
  int max_order = 6;
  double beta = 2.0;
};

// Character n-gram F-score. Whitespace is removed and the strings are
// compared as code points. Per-order precision and recall come from clipped
// n-gram counts, are averaged over the orders both strings can populate, and
// are combined into F-beta. Returns a value in [0, 1].
double chrf(std::string_view hypothesis, std::string_view reference, const ChrfParams& params = {});

}  // namespace tabeval
