#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabeval/baseline.hpp"
#include "tabeval/dataset.hpp"
#include "tabeval/metrics.hpp"

namespace tabeval {

struct TableEntry {
  std::string id;
  TableScore tabeval;
  std::vector<BaselineScore> baselines;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
  bool missing_prediction = false;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroAverages {
  PRF tabeval;
  double n_pred = 0.0;
  double n_gold = 0.0;
  std::map<std::string, PRF> baselines;  // keyed by BaselineScore::key()
};

struct MetricReport {
  std::string model_id;
  std::vector<TableEntry> tables;  // sorted by id
  MacroAverages macro;
  std::vector<std::string> unmatched_predictions;

  const TableEntry* find(const std::string& table_id) const;
  // Failed tables plus missing predictions.
  std::size_t failures() const;
};

struct CorpusConfig {
  TabEvalOptions tabeval;
  RecordMode record_mode = RecordMode::triple;
  std::vector<BaselineMetric> baselines{BaselineMetric::exact, BaselineMetric::chrf};
  EmbeddingConfig embedding;
  std::size_t parallelism = 1;
  ParseOptions parse;
};

// Scores every gold table against the prediction with the same id. Missing
// or failed tables score zero and stay in the macro averages. Entries are
// ordered by id whatever the parallelism.
MetricReport evaluate_corpus(std::span<const DatasetRecord> gold, std::span<const PredictionRecord> predictions,
                             const CorpusConfig& config, Unroller& unroller, const PairScorer& scorer,
                             Embedder* embedder = nullptr);

// Recomputes macro averages from the entries.
MacroAverages macro_average(const std::vector<TableEntry>& tables);

nlohmann::json to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

}  // namespace tabeval
