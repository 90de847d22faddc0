#include "tabeval/entail.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <semaphore>
#include <stdexcept>

#include "tabeval/error.hpp"
#include "tabeval/http.hpp"
#include "tabeval/log.hpp"
#include "tabeval/text.hpp"

namespace tabeval {

using nlohmann::json;

std::string_view to_string(ScorerBackend b) {
  switch (b) {
    case ScorerBackend::nli_remote:
      return "nli_remote";
    case ScorerBackend::lexical:
      return "lexical";
    case ScorerBackend::exact:
      return "exact";
  }
  return "?";
}

ScorerBackend scorer_backend_from_string(std::string_view s) {
  if (s == "nli_remote" || s == "nli") return ScorerBackend::nli_remote;
  if (s == "lexical") return ScorerBackend::lexical;
  if (s == "exact") return ScorerBackend::exact;
  throw ConfigError("unknown scorer backend: " + std::string(s));
}

double exact_score(std::string_view a, std::string_view b) {
  return text::normalize_ws(a) == text::normalize_ws(b) ? 1.0 : 0.0;
}

double lexical_score(std::string_view premise, std::string_view hypothesis) {
  auto p = text::word_tokens(premise);
  auto h = text::word_tokens(hypothesis);
  if (p.empty() && h.empty()) return 1.0;
  if (p.empty() || h.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : p) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : h) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(h.size());
  double recall = static_cast<double>(common) / static_cast<double>(p.size());
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

void check_pairs(std::span<const ScorePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("score batch is empty");
  for (const auto& p : pairs) {
    if (text::normalize_ws(p.premise).empty() || text::normalize_ws(p.hypothesis).empty())
      throw std::invalid_argument("score pair has a blank sentence");
  }
}

class ExactScorer final : public PairScorer {
 public:
  std::vector<double> score(std::span<const ScorePair> pairs) const override {
    check_pairs(pairs);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(exact_score(p.premise, p.hypothesis));
    return out;
  }
};

class LexicalScorer final : public PairScorer {
 public:
  std::vector<double> score(std::span<const ScorePair> pairs) const override {
    check_pairs(pairs);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(lexical_score(p.premise, p.hypothesis));
    return out;
  }
};

// Client of the NLI service: POST /v1/entail with {"pairs": [{premise,
// hypothesis}]}, reply {"scores": [{entailment, neutral, contradiction}]}.
class RemoteNliScorer final : public PairScorer {
 public:
  explicit RemoteNliScorer(const ScorerConfig& config)
      : config_(config),
        endpoint_(parse_endpoint(config.endpoint_url)),
        pool_(endpoint_.origin, config.timeout),
        slots_(std::max<std::ptrdiff_t>(1, config.max_in_flight)) {
    if (config_.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    path_ = endpoint_.path;
    if (!path_.empty() && path_.back() == '/') path_.pop_back();
    if (path_.size() < 10 || path_.compare(path_.size() - 10, 10, "/v1/entail") != 0) path_ += "/v1/entail";
  }

  std::vector<double> score(std::span<const ScorePair> pairs) const override {
    check_pairs(pairs);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t start = 0; start < pairs.size(); start += config_.batch_size) {
      auto chunk = pairs.subspan(start, std::min(config_.batch_size, pairs.size() - start));
      auto scores = post_chunk(chunk);
      out.insert(out.end(), scores.begin(), scores.end());
    }
    return out;
  }

 private:
  std::string clip(const std::string& s) const {
    auto cut = text::truncate_utf8(s, config_.max_chars);
    if (cut.size() < s.size())
      log().warn("truncating {}-byte sentence to {} bytes for the NLI backend", s.size(), cut.size());
    return std::string(cut);
  }

  std::vector<double> post_chunk(std::span<const ScorePair> chunk) const {
    json body;
    body["pairs"] = json::array();
    for (const auto& p : chunk) body["pairs"].push_back({{"premise", clip(p.premise)}, {"hypothesis", clip(p.hypothesis)}});
    const auto payload = body.dump();

    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
      std::string raw;
      try {
        slots_.acquire();
        struct Release {
          std::counting_semaphore<>& s;
          ~Release() { s.release(); }
        } release{slots_};
        raw = pool_.post_json(path_, payload);
      } catch (const BackendUnavailable& e) {
        last_error = e.what();
        log().warn("NLI request attempt {}/{} failed: {}", attempt, config_.max_attempts, last_error);
        continue;
      }
      return decode(raw, chunk.size());
    }
    throw BackendUnavailable("NLI backend unavailable: " + last_error);
  }

  static std::vector<double> decode(const std::string& raw, std::size_t expected) {
    std::vector<double> out;
    try {
      auto reply = json::parse(raw);
      const auto& scores = reply.at("scores");
      if (scores.size() != expected)
        throw BackendUnavailable("NLI backend returned " + std::to_string(scores.size()) + " scores for " +
                                 std::to_string(expected) + " pairs");
      for (const auto& s : scores) {
        double v = s.at("entailment").get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
          double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
          log().warn("clamping out-of-range entailment score {} to {}", v, clamped);
          v = clamped;
        }
        out.push_back(v);
      }
    } catch (const json::exception& e) {
      throw BackendUnavailable(std::string("malformed NLI reply: ") + e.what());
    }
    return out;
  }

  ScorerConfig config_;
  Endpoint endpoint_;
  std::string path_;
  mutable HttpPool pool_;
  mutable std::counting_semaphore<> slots_;
};

}  // namespace

std::unique_ptr<PairScorer> make_scorer(const ScorerConfig& config) {
  if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  switch (config.backend) {
    case ScorerBackend::exact:
      return std::make_unique<ExactScorer>();
    case ScorerBackend::lexical:
      return std::make_unique<LexicalScorer>();
    case ScorerBackend::nli_remote:
      if (config.endpoint_url.empty()) throw ConfigError("nli_remote scorer needs an endpoint URL");
      return std::make_unique<RemoteNliScorer>(config);
  }
  throw ConfigError("unknown scorer backend");
}

std::vector<double> score_batch(std::span<const ScorePair> pairs, const ScorerConfig& config) {
  return make_scorer(config)->score(pairs);
}

EntailmentMatrix build_matrix(const StatementSet& predicted, const StatementSet& gold, Direction direction,
                              const PairScorer& scorer) {
  const auto n = predicted.size();
  const auto m = gold.size();
  if (n == 0 || m == 0) throw std::invalid_argument("build_matrix needs non-empty statement sets");
  std::vector<ScorePair> pairs;
  pairs.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& p = predicted.statements[i].text;
      const auto& g = gold.statements[j].text;
      if (direction == Direction::gold_entails_pred) pairs.push_back({g, p});
      else pairs.push_back({p, g});
    }
  }
  auto scores = scorer.score(pairs);
  if (scores.size() != pairs.size()) throw BackendUnavailable("scorer returned the wrong number of scores");
  EntailmentMatrix out;
  out.direction = direction;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scores[i * m + j];
  return out;
}

}  // namespace tabeval
