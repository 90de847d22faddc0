#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabeval/unroll.hpp"

namespace tabeval {

struct ScorePair {
  std::string premise;
  std::string hypothesis;
};

enum class ScorerBackend { nli_remote, lexical, exact };

std::string_view to_string(ScorerBackend b);
ScorerBackend scorer_backend_from_string(std::string_view s);

struct ScorerConfig {
  ScorerBackend backend = ScorerBackend::exact;
  std::string endpoint_url;  // nli_remote: base URL, requests go to <url>/v1/entail
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_chars = 2000;  // per-sentence budget for the remote model
  int max_attempts = 3;
  std::ptrdiff_t max_in_flight = 4;
};

// Directional sentence-pair scorer: score(premise, hypothesis) in [0, 1].
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  // Output has one score per pair, in order. Throws std::invalid_argument for
  // an empty batch or a blank sentence.
  virtual std::vector<double> score(std::span<const ScorePair> pairs) const = 0;
};

std::unique_ptr<PairScorer> make_scorer(const ScorerConfig& config);

std::vector<double> score_batch(std::span<const ScorePair> pairs, const ScorerConfig& config);

// 1 when the whitespace-normalized strings are equal.
double exact_score(std::string_view a, std::string_view b);

// F1 of the lowercased, punctuation-free token multisets.
double lexical_score(std::string_view premise, std::string_view hypothesis);

enum class Direction { gold_entails_pred, pred_entails_gold };

// Rows index predicted statements, columns gold statements.
struct EntailmentMatrix {
  Eigen::MatrixXd values;
  Direction direction = Direction::gold_entails_pred;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Scores all N x M pairs row-major. gold_entails_pred uses the gold statement
// as premise; pred_entails_gold reverses the roles.
EntailmentMatrix build_matrix(const StatementSet& predicted, const StatementSet& gold, Direction direction,
                              const PairScorer& scorer);

}  // namespace tabeval
