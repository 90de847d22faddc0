#include <doctest.h>

#include <json.hpp>

#include <atomic>
#include <deque>
#include <filesystem>
#include <thread>

#include "support.hpp"
#include "tabeval/error.hpp"
#include "tabeval/fs.hpp"
#include "tabeval/llm.hpp"

using namespace tabeval;
using nlohmann::json;

namespace {

// Replays scripted replies; an empty script entry means a transport failure.
class ScriptedClient final : public CompletionClient {
 public:
  std::deque<std::optional<std::string>> script;
  std::string fallback;
  std::vector<std::string> prompts;
  std::atomic<int> calls{0};
  std::chrono::milliseconds delay{0};
  std::mutex mu;

  std::string complete(const CompletionRequest& request) override {
    ++calls;
    std::this_thread::sleep_for(delay);
    std::lock_guard lock(mu);
    prompts.push_back(request.prompt);
    CHECK(request.temperature == 0.0);
    if (script.empty()) return fallback;
    auto next = script.front();
    script.pop_front();
    if (!next) throw BackendUnavailable("connection refused");
    return *next;
  }
};

}  // namespace

TEST_SUITE("cache key") {
  TEST_CASE("stable and sensitive to every component") {
    const auto t = fixtures::rice();
    const auto a = UnrollCacheKey::for_table(t, "m1");
    CHECK(a == UnrollCacheKey::for_table(fixtures::rice(), "m1"));
    CHECK(a.hex() == UnrollCacheKey::for_table(fixtures::rice(), "m1").hex());
    CHECK(a.hex().size() == 64);
    CHECK(a.prompt_version == unroll_prompt_version());
    CHECK(a.hex() != UnrollCacheKey::for_table(t, "m2").hex());
    auto renamed = t;
    renamed.intent = "Other";
    CHECK(a.hex() != UnrollCacheKey::for_table(renamed, "m1").hex());
    auto edited = t;
    edited.rows[0][2].text = "Someone";
    CHECK(a.table_digest != UnrollCacheKey::for_table(edited, "m1").table_digest);
  }

  TEST_CASE("source format does not matter") {
    const auto md = parse_markdown("|a|b|\n|-|-|\n|1|2|", "x");
    const auto html = parse_html("<table><tr><th>a</th><th>b</th></tr><tr><td>1</td><td>2</td></tr></table>", "x");
    CHECK(UnrollCacheKey::for_table(md, "m") == UnrollCacheKey::for_table(html, "m"));
  }
}

TEST_SUITE("cache") {
  TEST_CASE("store and load round trip on disk") {
    fixtures::TempDir dir;
    UnrollCache cache(dir.path / "c");
    const auto key = UnrollCacheKey::for_table(fixtures::koch(), "m");
    CHECK_FALSE(cache.load(key));
    cache.store(key, CacheEntry{"p", "r", "m", key.prompt_version, "2024-01-01T00:00:00Z"});
    CHECK(cache.path_for(key) == dir.path / "c" / key.hex());
    const auto j = json::parse(read_file(cache.path_for(key)));
    CHECK(j.at("raw_response") == "r");
    CHECK(j.at("prompt") == "p");
    CHECK(j.at("model_id") == "m");
    CHECK(j.at("prompt_version") == key.prompt_version);
    CHECK(j.contains("timestamp"));
    const auto back = cache.load(key);
    REQUIRE(back);
    CHECK(back->raw_response == "r");
    // No temp files remain beside the entry.
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path / "c"), {}) == 1);
  }

  TEST_CASE("corrupt entries read as misses") {
    fixtures::TempDir dir;
    UnrollCache cache(dir.path);
    const auto key = UnrollCacheKey::for_table(fixtures::koch(), "m");
    write_file_atomic(cache.path_for(key), "{not json");
    CHECK_FALSE(cache.load(key));
  }
}

TEST_SUITE("llm unroller") {
  TEST_CASE("Isabella Rice reply gives ten statements and is cached") {
    fixtures::TempDir dir;
    UnrollCache cache(dir.path);
    ScriptedClient client;
    client.fallback = fixtures::kRiceResponse;
    LlmUnroller unroller(client, &cache, {"stub-model"});
    const auto first = unroller.unroll(fixtures::rice());
    CHECK(first.size() == 10);
    CHECK(first.source == StatementSource::llm);
    CHECK(client.calls == 1);
    CHECK(client.prompts[0] == build_unroll_prompt(fixtures::rice()));

    LlmUnroller again(client, &cache, {"stub-model"});
    const auto second = again.unroll(fixtures::rice());
    CHECK(client.calls == 1);
    CHECK(again.requests_issued() == 0);
    CHECK(second == first);
  }

  TEST_CASE("garbage twice then valid succeeds on the third attempt") {
    ScriptedClient client;
    client.script = {std::string("I cannot help."), std::string("Sure! Here you go."), fixtures::kKochResponse};
    LlmUnroller unroller(client, nullptr, {"m", 3});
    const auto s = unroller.unroll(fixtures::koch());
    CHECK(s.size() == 8);
    CHECK(unroller.requests_issued() == 3);
    REQUIRE(client.prompts.size() == 3);
    CHECK(client.prompts[0].find(kFormatNudge) == std::string::npos);
    CHECK(client.prompts[1].find(kFormatNudge) != std::string::npos);
    CHECK(client.prompts[2].find(kFormatNudge) != std::string::npos);
  }

  TEST_CASE("transport errors are retried") {
    ScriptedClient client;
    client.script = {std::nullopt, fixtures::kKochResponse};
    LlmUnroller unroller(client, nullptr, {"m", 3});
    CHECK(unroller.unroll(fixtures::koch()).size() == 8);
    CHECK(client.calls == 2);
    CHECK(client.prompts[1].find(kFormatNudge) == std::string::npos);
  }

  TEST_CASE("exhausted retries raise the last failure kind") {
    ScriptedClient down;
    down.script = {std::nullopt, std::nullopt, std::nullopt};
    CHECK_THROWS_AS(unroll_llm(fixtures::koch(), down, nullptr, {"m", 3}), BackendUnavailable);
    CHECK(down.calls == 3);

    ScriptedClient garbage;
    garbage.fallback = "nothing useful";
    CHECK_THROWS_AS(unroll_llm(fixtures::koch(), garbage, nullptr, {"m", 2}), UnparseableResponse);
    CHECK(garbage.calls == 2);
  }

  TEST_CASE("failures are not cached") {
    fixtures::TempDir dir;
    UnrollCache cache(dir.path);
    ScriptedClient client;
    client.fallback = "junk";
    CHECK_THROWS(unroll_llm(fixtures::koch(), client, &cache, {"m", 1}));
    CHECK_FALSE(cache.load(UnrollCacheKey::for_table(fixtures::koch(), "m")));
  }

  TEST_CASE("stale cached reply is refetched") {
    fixtures::TempDir dir;
    UnrollCache cache(dir.path);
    const auto key = UnrollCacheKey::for_table(fixtures::koch(), "m");
    cache.store(key, CacheEntry{"p", "garbage", "m", key.prompt_version, "t"});
    ScriptedClient client;
    client.fallback = fixtures::kKochResponse;
    CHECK(unroll_llm(fixtures::koch(), client, &cache, {"m"}).size() == 8);
    CHECK(client.calls == 1);
    CHECK(cache.load(key)->raw_response == fixtures::kKochResponse);
  }

  TEST_CASE("concurrent misses on one key share a request") {
    for (bool with_cache : {false, true}) {
      fixtures::TempDir dir;
      UnrollCache cache(dir.path);
      ScriptedClient client;
      client.fallback = fixtures::kKochResponse;
      client.delay = std::chrono::milliseconds(150);
      LlmUnroller unroller(client, with_cache ? &cache : nullptr, {"m"});
      std::vector<std::size_t> sizes(8);
      {
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < sizes.size(); ++i)
          threads.emplace_back([&, i] { sizes[i] = unroller.unroll(fixtures::koch()).size(); });
      }
      CHECK(client.calls == 1);
      for (auto n : sizes) CHECK(n == 8);
    }
  }

  TEST_CASE("distinct keys are fetched independently") {
    ScriptedClient client;
    client.fallback = "Statements:\n1. x\n";
    LlmUnroller unroller(client, nullptr, {"m"});
    unroller.unroll(fixtures::koch());
    unroller.unroll(fixtures::rice());
    CHECK(client.calls == 2);
  }

  TEST_CASE("configuration is validated") {
    ScriptedClient client;
    CHECK_THROWS_AS(LlmUnroller(client, nullptr, {""}), ConfigError);
    CHECK_THROWS_AS(LlmUnroller(client, nullptr, {"m", 0}), ConfigError);
  }
}

TEST_SUITE("http completion client") {
  TEST_CASE("chat-completions request and reply") {
    json seen;
    std::string auth;
    fixtures::StubServer stub([&](httplib::Server& s) {
      s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "Statements:\n1. ok\n"}}}}}}};
        res.set_content(reply.dump(), "application/json");
      });
    });
    HttpCompletionClient client(stub.url("/v1/chat/completions"), "secret");
    CHECK(client.complete({"gpt-x", "hello", 0.0}) == "Statements:\n1. ok\n");
    CHECK(auth == "Bearer secret");
    CHECK(seen.at("model") == "gpt-x");
    CHECK(seen.at("temperature") == 0.0);
    CHECK(seen.at("messages").at(0).at("role") == "user");
    CHECK(seen.at("messages").at(0).at("content") == "hello");
  }

  TEST_CASE("HTTP errors and bad bodies surface as BackendUnavailable") {
    std::atomic<int> hits{0};
    fixtures::StubServer stub([&](httplib::Server& s) {
      s.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
      });
      s.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    });
    HttpCompletionClient failing(stub.url("/fail"), "k");
    CHECK_THROWS_AS(failing.complete({"m", "p"}), BackendUnavailable);
    HttpCompletionClient bad(stub.url("/bad"), "k");
    CHECK_THROWS_AS(bad.complete({"m", "p"}), BackendUnavailable);

    hits = 0;
    CHECK_THROWS_AS(unroll_llm(fixtures::koch(), failing, nullptr, {"m", 3}), BackendUnavailable);
    CHECK(hits == 3);
  }

  TEST_CASE("unreachable host") {
    HttpCompletionClient client("http://127.0.0.1:1/v1", "k", std::chrono::milliseconds(500));
    CHECK_THROWS_AS(client.complete({"m", "p"}), BackendUnavailable);
  }

  TEST_CASE("bad URL is a configuration error") {
    CHECK_THROWS_AS(HttpCompletionClient("not a url", "k"), ConfigError);
  }
}
