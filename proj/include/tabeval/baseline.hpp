#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabeval/http.hpp"
#include "tabeval/table.hpp"

namespace tabeval {

enum class BaselineMetric { exact, chrf, embedding };

std::string_view to_string(BaselineMetric m);
BaselineMetric baseline_metric_from_string(std::string_view s);

struct BaselineScore {
  BaselineMetric metric = BaselineMetric::exact;
  RecordMode record_mode = RecordMode::triple;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // "<metric>/<record mode>", e.g. "chrf/triple".
  std::string key() const;
};

// Per-token vectors for each text; row t of a matrix is token t, unit norm.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Eigen::MatrixXd> embed(std::span<const std::string> texts) = 0;
};

// Client of the embedding endpoint: POST /v1/embed {"texts": [...]}, reply
// {"embeddings": [{"tokens": n, "vectors": [[...], ...]}]}.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string_view url, std::chrono::milliseconds timeout = std::chrono::seconds(60),
                 std::size_t batch_size = 64);
  std::vector<Eigen::MatrixXd> embed(std::span<const std::string> texts) override;

 private:
  Endpoint endpoint_;
  std::string path_;
  HttpPool pool_;
  std::size_t batch_size_;
};

struct EmbeddingConfig {
  // Affine rescale (x - b) / (1 - b) of the similarity; off when unset.
  std::optional<double> rescale_baseline;
};

// Greedy token matching: precision averages each candidate token's best
// cosine against the reference, recall the reverse; returns their F1,
// clipped to [0, 1] after the optional rescale.
double greedy_match_f1(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& reference,
                       const EmbeddingConfig& config = {});

// Record-level precision/recall: each predicted record's best similarity to a
// gold record, and vice versa. `embedder` is required for the embedding metric.
BaselineScore baseline_score(const Table& gold, const Table& pred, BaselineMetric metric, RecordMode mode,
                             Embedder* embedder = nullptr, const EmbeddingConfig& config = {});

}  // namespace tabeval
