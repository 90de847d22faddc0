#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "tabeval/http.hpp"
#include "tabeval/unroll.hpp"

namespace tabeval {

inline constexpr const char* kLlmKeyEnv = "TABEVAL_LLM_API_KEY";

struct CompletionRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
};

// Text-completion capability. Implementations throw BackendUnavailable on
// transport failures.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// Chat-completions style HTTP API: POST {model, messages, temperature} and
// read choices[0].message.content.
class HttpCompletionClient final : public CompletionClient {
 public:
  HttpCompletionClient(std::string_view url, std::string api_key,
                       std::chrono::milliseconds timeout = std::chrono::seconds(120));
  std::string complete(const CompletionRequest& request) override;

 private:
  Endpoint endpoint_;
  std::string api_key_;
  HttpPool pool_;
};

struct UnrollCacheKey {
  std::string table_digest;
  std::string prompt_version;
  std::string model_id;

  static UnrollCacheKey for_table(const Table& table, std::string model_id);
  // File name of the cache entry.
  std::string hex() const;

  friend bool operator==(const UnrollCacheKey&, const UnrollCacheKey&) = default;
};

struct CacheEntry {
  std::string prompt;
  std::string raw_response;
  std::string model_id;
  std::string prompt_version;
  std::string timestamp;
};

// One JSON file per key under `dir`. Writes go through a temp file and a
// rename, so readers never observe partial entries.
class UnrollCache {
 public:
  explicit UnrollCache(std::filesystem::path dir);

  std::optional<CacheEntry> load(const UnrollCacheKey& key) const;
  void store(const UnrollCacheKey& key, const CacheEntry& entry);
  std::filesystem::path path_for(const UnrollCacheKey& key) const;

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
};

struct LlmOptions {
  std::string model_id;
  int max_attempts = 3;
};

// Unrolls through a completion client with caching, retries and in-flight
// deduplication: concurrent misses on one key share a single request.
class LlmUnroller final : public Unroller {
 public:
  LlmUnroller(CompletionClient& client, UnrollCache* cache, LlmOptions opts);

  StatementSet unroll(const Table& table) override;

  // Completion requests issued so far, retries included.
  std::size_t requests_issued() const { return requests_.load(); }

 private:
  std::optional<std::string> cached_response(const Table& table, const UnrollCacheKey& key) const;
  std::string fetch(const Table& table, const UnrollCacheKey& key);

  CompletionClient& client_;
  UnrollCache* cache_;
  LlmOptions opts_;
  std::atomic<std::size_t> requests_{0};
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::string>> in_flight_;
};

StatementSet unroll_llm(const Table& table, CompletionClient& client, UnrollCache* cache, const LlmOptions& opts);

}  // namespace tabeval
