#include "tabeval/llm.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>

#include "tabeval/digest.hpp"
#include "tabeval/error.hpp"
#include "tabeval/fs.hpp"
#include "tabeval/log.hpp"

namespace tabeval {

using nlohmann::json;

HttpCompletionClient::HttpCompletionClient(std::string_view url, std::string api_key,
                                           std::chrono::milliseconds timeout)
    : endpoint_(parse_endpoint(url)), api_key_(std::move(api_key)), pool_(endpoint_.origin, timeout) {}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  json body = {
      {"model", request.model_id},
      {"temperature", request.temperature},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };
  auto raw = pool_.post_json(endpoint_.path, body.dump(), {{"Authorization", "Bearer " + api_key_}});
  try {
    auto reply = json::parse(raw);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed completion reply: ") + e.what());
  }
}

UnrollCacheKey UnrollCacheKey::for_table(const Table& table, std::string model_id) {
  return {sha256_hex(render_markdown(table) + "\n" + table.intent), unroll_prompt_version(), std::move(model_id)};
}

std::string UnrollCacheKey::hex() const {
  json j = {{"table_digest", table_digest}, {"prompt_version", prompt_version}, {"model_id", model_id}};
  return sha256_hex(j.dump());
}

UnrollCache::UnrollCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path UnrollCache::path_for(const UnrollCacheKey& key) const { return dir_ / key.hex(); }

std::optional<CacheEntry> UnrollCache::load(const UnrollCacheKey& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    auto j = json::parse(in);
    return CacheEntry{j.at("prompt"), j.at("raw_response"), j.at("model_id"), j.at("prompt_version"),
                      j.at("timestamp")};
  } catch (const json::exception& e) {
    log().warn("ignoring corrupt cache entry {}: {}", path_for(key).string(), e.what());
    return std::nullopt;
  }
}

void UnrollCache::store(const UnrollCacheKey& key, const CacheEntry& entry) {
  std::shared_ptr<std::mutex> lock;
  {
    std::lock_guard guard(mu_);
    auto& slot = key_locks_[key.hex()];
    if (!slot) slot = std::make_shared<std::mutex>();
    lock = slot;
  }
  std::lock_guard guard(*lock);
  json j = {{"prompt", entry.prompt},
            {"raw_response", entry.raw_response},
            {"model_id", entry.model_id},
            {"prompt_version", entry.prompt_version},
            {"timestamp", entry.timestamp}};
  write_file_atomic(path_for(key), j.dump(2) + "\n");
}

namespace {

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

LlmUnroller::LlmUnroller(CompletionClient& client, UnrollCache* cache, LlmOptions opts)
    : client_(client), cache_(cache), opts_(std::move(opts)) {
  if (opts_.model_id.empty()) throw ConfigError("LLM unroller needs a model id");
  if (opts_.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
}

std::optional<std::string> LlmUnroller::cached_response(const Table& table, const UnrollCacheKey& key) const {
  if (!cache_) return std::nullopt;
  auto hit = cache_->load(key);
  if (!hit) return std::nullopt;
  try {
    parse_unroll_response(hit->raw_response, table);
    return std::move(hit->raw_response);
  } catch (const UnparseableResponse&) {
    log().warn("cached response {} no longer parses; refetching", key.hex());
    return std::nullopt;
  }
}

StatementSet LlmUnroller::unroll(const Table& table) {
  const auto key = UnrollCacheKey::for_table(table, opts_.model_id);
  if (auto cached = cached_response(table, key)) return parse_unroll_response(*cached, table);

  std::promise<std::string> promise;
  std::shared_future<std::string> shared;
  bool owner = false;
  {
    std::lock_guard guard(mu_);
    auto it = in_flight_.find(key.hex());
    if (it != in_flight_.end()) {
      shared = it->second;
    } else {
      shared = promise.get_future().share();
      in_flight_.emplace(key.hex(), shared);
      owner = true;
    }
  }
  if (owner) {
    try {
      // Another owner may have stored the entry since the first lookup.
      auto late = cached_response(table, key);
      promise.set_value(late ? std::move(*late) : fetch(table, key));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
    std::lock_guard guard(mu_);
    in_flight_.erase(key.hex());
  }
  return parse_unroll_response(shared.get(), table);
}

std::string LlmUnroller::fetch(const Table& table, const UnrollCacheKey& key) {
  const auto prompt = build_unroll_prompt(table);
  std::string last_error;
  bool nudge = false;
  bool last_was_parse_error = false;
  for (int attempt = 1; attempt <= opts_.max_attempts; ++attempt) {
    CompletionRequest req{opts_.model_id, prompt, 0.0};
    if (nudge) req.prompt += "\n" + std::string(kFormatNudge) + "\n";
    ++requests_;
    std::string raw;
    try {
      raw = client_.complete(req);
    } catch (const BackendUnavailable& e) {
      last_error = e.what();
      last_was_parse_error = false;
      log().warn("unroll attempt {}/{} failed: {}", attempt, opts_.max_attempts, last_error);
      continue;
    }
    try {
      parse_unroll_response(raw, table);
    } catch (const UnparseableResponse& e) {
      last_error = e.what();
      last_was_parse_error = true;
      nudge = true;
      log().warn("unroll attempt {}/{} unparseable: {}", attempt, opts_.max_attempts, last_error);
      continue;
    }
    if (attempt > 1) log().info("unroll succeeded after {} attempts", attempt);
    if (cache_) cache_->store(key, CacheEntry{req.prompt, raw, opts_.model_id, key.prompt_version, utc_now()});
    return raw;
  }
  if (last_was_parse_error) throw UnparseableResponse(last_error);
  throw BackendUnavailable("LLM backend failed after " + std::to_string(opts_.max_attempts) +
                           " attempts: " + last_error);
}

StatementSet unroll_llm(const Table& table, CompletionClient& client, UnrollCache* cache, const LlmOptions& opts) {
  LlmUnroller unroller(client, cache, opts);
  return unroller.unroll(table);
}

}  // namespace tabeval
