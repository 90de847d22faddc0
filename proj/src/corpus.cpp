#include "tabeval/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "tabeval/error.hpp"
#include "tabeval/log.hpp"

namespace tabeval {

using nlohmann::json;

const TableEntry* MetricReport::find(const std::string& table_id) const {
  auto it = std::lower_bound(tables.begin(), tables.end(), table_id,
                             [](const TableEntry& e, const std::string& id) { return e.id < id; });
  return it != tables.end() && it->id == table_id ? &*it : nullptr;
}

std::size_t MetricReport::failures() const {
  return static_cast<std::size_t>(std::count_if(tables.begin(), tables.end(), [](const TableEntry& e) {
    return e.error.has_value() || e.missing_prediction;
  }));
}

namespace {

TableEntry zero_entry(const std::string& id, const CorpusConfig& config) {
  TableEntry e;
  e.id = id;
  for (auto m : config.baselines) e.baselines.push_back(BaselineScore{m, config.record_mode, 0.0, 0.0, 0.0});
  return e;
}

TableEntry score_one(const DatasetRecord& gold_rec, const PredictionRecord* pred_rec, const CorpusConfig& config,
                     Unroller& unroller, const PairScorer& scorer, Embedder* embedder) {
  TableEntry entry = zero_entry(gold_rec.id, config);
  if (!pred_rec) {
    entry.missing_prediction = true;
    entry.warnings.push_back("no prediction for this table");
    return entry;
  }
  try {
    const Table gold = parse_table(gold_rec.table, gold_rec.intent, config.parse);
    std::optional<Table> pred;
    try {
      pred = parse_table(pred_rec->table, gold_rec.intent, config.parse);
    } catch (const MalformedTable& e) {
      entry.warnings.push_back(std::string("prediction does not parse: ") + e.what());
    }
    if (!pred) {
      // An unparseable prediction contributes no statements.
      auto gold_set = gold.num_rows() ? unroller.unroll(gold) : StatementSet{};
      entry.tabeval = TableScore{0.0, 0.0, 0.0, 0, gold_set.size()};
      return entry;
    }
    entry.tabeval = tabeval_score(gold, *pred, unroller, scorer, config.tabeval, &entry.warnings);
    entry.baselines.clear();
    for (auto m : config.baselines)
      entry.baselines.push_back(baseline_score(gold, *pred, m, config.record_mode, embedder, config.embedding));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    entry = zero_entry(gold_rec.id, config);
    entry.error = e.what();
  }
  return entry;
}

}  // namespace

MacroAverages macro_average(const std::vector<TableEntry>& tables) {
  MacroAverages m;
  if (tables.empty()) return m;
  std::map<std::string, std::size_t> counts;
  for (const auto& e : tables) {
    m.tabeval.precision += e.tabeval.precision;
    m.tabeval.recall += e.tabeval.recall;
    m.tabeval.f1 += e.tabeval.f1;
    m.n_pred += static_cast<double>(e.tabeval.n_pred);
    m.n_gold += static_cast<double>(e.tabeval.n_gold);
    for (const auto& b : e.baselines) {
      auto& acc = m.baselines[b.key()];
      acc.precision += b.precision;
      acc.recall += b.recall;
      acc.f1 += b.f1;
      ++counts[b.key()];
    }
  }
  const auto n = static_cast<double>(tables.size());
  m.tabeval.precision /= n;
  m.tabeval.recall /= n;
  m.tabeval.f1 /= n;
  m.n_pred /= n;
  m.n_gold /= n;
  for (auto& [key, acc] : m.baselines) {
    const auto k = static_cast<double>(counts[key]);
    acc.precision /= k;
    acc.recall /= k;
    acc.f1 /= k;
  }
  return m;
}

MetricReport evaluate_corpus(std::span<const DatasetRecord> gold, std::span<const PredictionRecord> predictions,
                             const CorpusConfig& config, Unroller& unroller, const PairScorer& scorer,
                             Embedder* embedder) {
  if (config.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  for (auto m : config.baselines)
    if (m == BaselineMetric::embedding && !embedder) throw ConfigError("the embedding baseline needs an embedder");

  MetricReport report;
  std::map<std::string, const PredictionRecord*> by_id;
  std::set<std::string> gold_ids;
  for (const auto& g : gold) gold_ids.insert(g.id);
  for (const auto& p : predictions) {
    if (report.model_id.empty()) report.model_id = p.model_id;
    by_id.emplace(p.id, &p);
    if (!gold_ids.count(p.id)) report.unmatched_predictions.push_back(p.id);
  }
  std::sort(report.unmatched_predictions.begin(), report.unmatched_predictions.end());
  for (const auto& id : report.unmatched_predictions) log().warn("prediction {} has no reference table", id);

  std::vector<TableEntry> entries(gold.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < gold.size(); i = next++) {
      auto it = by_id.find(gold[i].id);
      try {
        entries[i] = score_one(gold[i], it == by_id.end() ? nullptr : it->second, config, unroller, scorer, embedder);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const auto threads = std::min(config.parallelism, std::max<std::size_t>(1, gold.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  std::sort(entries.begin(), entries.end(), [](const TableEntry& a, const TableEntry& b) { return a.id < b.id; });
  for (const auto& e : entries) {
    if (e.missing_prediction) log().warn("table {}: no prediction, scored 0", e.id);
    if (e.error) log().warn("table {}: {}", e.id, *e.error);
  }
  report.tables = std::move(entries);
  report.macro = macro_average(report.tables);
  return report;
}

namespace {

json prf_json(const PRF& v) { return {{"precision", v.precision}, {"recall", v.recall}, {"f1", v.f1}}; }

PRF prf_from(const json& j) { return {j.at("precision"), j.at("recall"), j.at("f1")}; }

}  // namespace

json to_json(const MetricReport& report) {
  json tables = json::array();
  for (const auto& e : report.tables) {
    json baselines = json::array();
    for (const auto& b : e.baselines)
      baselines.push_back({{"metric", to_string(b.metric)},
                           {"record_mode", to_string(b.record_mode)},
                           {"precision", b.precision},
                           {"recall", b.recall},
                           {"f1", b.f1}});
    tables.push_back({{"id", e.id},
                      {"tabeval",
                       {{"precision", e.tabeval.precision},
                        {"recall", e.tabeval.recall},
                        {"f1", e.tabeval.f1},
                        {"n_pred", e.tabeval.n_pred},
                        {"n_gold", e.tabeval.n_gold}}},
                      {"baselines", baselines},
                      {"warnings", e.warnings},
                      {"error", e.error ? json(*e.error) : json(nullptr)},
                      {"missing_prediction", e.missing_prediction}});
  }
  json baselines = json::object();
  for (const auto& [key, v] : report.macro.baselines) baselines[key] = prf_json(v);
  return {{"model_id", report.model_id},
          {"macro",
           {{"tabeval", prf_json(report.macro.tabeval)},
            {"n_pred", report.macro.n_pred},
            {"n_gold", report.macro.n_gold},
            {"baselines", baselines}}},
          {"tables", tables},
          {"unmatched_predictions", report.unmatched_predictions}};
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  try {
    r.model_id = j.at("model_id");
    for (const auto& t : j.at("tables")) {
      TableEntry e;
      e.id = t.at("id");
      const auto& s = t.at("tabeval");
      e.tabeval = {s.at("precision"), s.at("recall"), s.at("f1"), s.at("n_pred"), s.at("n_gold")};
      for (const auto& b : t.at("baselines"))
        e.baselines.push_back({baseline_metric_from_string(b.at("metric").get<std::string>()),
                               record_mode_from_string(b.at("record_mode").get<std::string>()), b.at("precision"),
                               b.at("recall"), b.at("f1")});
      e.warnings = t.value("warnings", std::vector<std::string>{});
      if (t.contains("error") && t.at("error").is_string()) e.error = t.at("error").get<std::string>();
      e.missing_prediction = t.value("missing_prediction", false);
      r.tables.push_back(std::move(e));
    }
    std::sort(r.tables.begin(), r.tables.end(), [](const TableEntry& a, const TableEntry& b) { return a.id < b.id; });
    const auto& m = j.at("macro");
    r.macro.tabeval = prf_from(m.at("tabeval"));
    r.macro.n_pred = m.at("n_pred");
    r.macro.n_gold = m.at("n_gold");
    for (const auto& [key, v] : m.at("baselines").items()) r.macro.baselines[key] = prf_from(v);
    r.unmatched_predictions = j.value("unmatched_predictions", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return r;
}

}  // namespace tabeval
