#include "tabeval/baseline.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

#include "tabeval/chrf.hpp"
#include "tabeval/error.hpp"
#include "tabeval/metrics.hpp"
#include "tabeval/text.hpp"

namespace tabeval {

using nlohmann::json;

std::string_view to_string(BaselineMetric m) {
  switch (m) {
    case BaselineMetric::exact:
      return "exact";
    case BaselineMetric::chrf:
      return "chrf";
    case BaselineMetric::embedding:
      return "embedding";
  }
  return "?";
}

BaselineMetric baseline_metric_from_string(std::string_view s) {
  if (s == "exact") return BaselineMetric::exact;
  if (s == "chrf") return BaselineMetric::chrf;
  if (s == "embedding") return BaselineMetric::embedding;
  throw ConfigError("unknown baseline metric: " + std::string(s));
}

std::string BaselineScore::key() const {
  return std::string(to_string(metric)) + "/" + std::string(to_string(record_mode));
}

RemoteEmbedder::RemoteEmbedder(std::string_view url, std::chrono::milliseconds timeout, std::size_t batch_size)
    : endpoint_(parse_endpoint(url)), pool_(endpoint_.origin, timeout), batch_size_(std::max<std::size_t>(1, batch_size)) {
  path_ = endpoint_.path;
  if (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (path_.size() < 9 || path_.compare(path_.size() - 9, 9, "/v1/embed") != 0) path_ += "/v1/embed";
}

std::vector<Eigen::MatrixXd> RemoteEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    auto chunk = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    json body = {{"texts", std::vector<std::string>(chunk.begin(), chunk.end())}};
    auto raw = pool_.post_json(path_, body.dump());
    try {
      auto reply = json::parse(raw);
      const auto& items = reply.at("embeddings");
      if (items.size() != chunk.size()) throw BackendUnavailable("embedding reply has the wrong length");
      for (const auto& item : items) {
        const auto& vecs = item.at("vectors");
        const auto rows = static_cast<Eigen::Index>(vecs.size());
        const auto dim = rows ? static_cast<Eigen::Index>(vecs.at(0).size()) : 0;
        Eigen::MatrixXd m(rows, dim);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto& v = vecs.at(static_cast<std::size_t>(r));
          if (static_cast<Eigen::Index>(v.size()) != dim) throw BackendUnavailable("ragged embedding reply");
          for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = v.at(static_cast<std::size_t>(c)).get<double>();
        }
        out.push_back(std::move(m));
      }
    } catch (const json::exception& e) {
      throw BackendUnavailable(std::string("malformed embedding reply: ") + e.what());
    }
  }
  return out;
}

double greedy_match_f1(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& reference,
                       const EmbeddingConfig& config) {
  if (candidate.rows() == 0 && reference.rows() == 0) return 1.0;
  if (candidate.rows() == 0 || reference.rows() == 0) return 0.0;
  if (candidate.cols() != reference.cols()) throw BackendUnavailable("embedding dimensions differ");
  const Eigen::MatrixXd sim = candidate * reference.transpose();
  double p = std::clamp(aggregate_precision(sim), 0.0, 1.0);
  double r = std::clamp(aggregate_recall(sim), 0.0, 1.0);
  double f = f1(p, r);
  if (config.rescale_baseline) {
    const double b = *config.rescale_baseline;
    f = (f - b) / (1.0 - b);
  }
  return std::clamp(f, 0.0, 1.0);
}

namespace {

std::vector<std::string> record_texts(const Table& t, RecordMode mode) {
  std::vector<std::string> out;
  for (const auto& r : extract_records(t, mode)) out.push_back(r.joined());
  return out;
}

}  // namespace

BaselineScore baseline_score(const Table& gold, const Table& pred, BaselineMetric metric, RecordMode mode,
                             Embedder* embedder, const EmbeddingConfig& config) {
  BaselineScore out;
  out.metric = metric;
  out.record_mode = mode;
  const auto g = record_texts(gold, mode);
  const auto p = record_texts(pred, mode);
  if (g.empty() && p.empty()) {
    out.precision = out.recall = out.f1 = 1.0;
    return out;
  }
  if (g.empty() || p.empty()) return out;

  Eigen::MatrixXd sim(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(g.size()));
  if (metric == BaselineMetric::embedding) {
    if (!embedder) throw ConfigError("the embedding baseline needs an embedder");
    // Embed each distinct record once.
    std::map<std::string, std::size_t> index;
    std::vector<std::string> unique;
    for (const auto* side : {&p, &g})
      for (const auto& s : *side)
        if (index.emplace(s, unique.size()).second) unique.push_back(s);
    auto vecs = embedder->embed(unique);
    if (vecs.size() != unique.size()) throw BackendUnavailable("embedder returned the wrong number of texts");
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            greedy_match_f1(vecs[index.at(p[i])], vecs[index.at(g[j])], config);
  } else {
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            metric == BaselineMetric::exact ? (text::normalize_ws(p[i]) == text::normalize_ws(g[j]) ? 1.0 : 0.0)
                                            : chrf(p[i], g[j]);
  }
  out.precision = aggregate_precision(sim);
  out.recall = aggregate_recall(sim);
  out.f1 = f1(out.precision, out.recall);
  return out;
}

}  // namespace tabeval
