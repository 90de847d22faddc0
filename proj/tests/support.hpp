#pragma once

// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include <Eigen/Dense>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tabeval/table.hpp"
#include "tabeval/unroll.hpp"

namespace fixtures {

inline const std::string kKochMarkdown =
    "|Year|     Competition     |         Venue        |Position|Event|Notes|\n"
    "|----|---------------------|----------------------|--------|-----|-----|\n"
    "|1966|European Indoor Games|Dortmund, West Germany|  1st   |400 m| 47.9| \n"
    "|1967|European Indoor Games|Prague, Czechoslovakia|  2nd   |400 m| 48.6| \n";

inline const std::string kRiceMarkdown =
    "|Year|               Title                |        Role        |Notes|\n"
    "|----|------------------------------------|--------------------|-----|\n"
    "|2015|Kidnapped: The Hannah Anderson Story|   Becca McKinnon   | NaN | \n"
    "|2015|       Jem and the Holograms        |Young Jerrica Benton| NaN | \n"
    "|2015|             Asomatous              |    Sophie Gibbs    | NaN | \n"
    "|2017|           Unforgettable            |         Lily       | NaN | \n"
    "|2019|             Our Friend             |         Molly      | NaN |\n";

// The model answer printed for the Koch example.
inline const std::string kKochResponse =
    "Statements:\n"
    "1. European Indoor Games in 1966 occurred in Dortmund, West Germany.\n"
    "2. 1st position was obtained in the 1966 European Indoor Games.\n"
    "3. The 1966 European Indoor Games had a 400 m event.\n"
    "4. 47.9 in the 1966 European Indoor Games.\n"
    "5. European Indoor Games in 1967 occurred in Prague, Czechoslovakia.\n"
    "6. 2nd position was obtained in the 1967 European Indoor Games.\n"
    "7. The 1967 European Indoor Games had a 400 m event.\n"
    "8. 48.6 in the 1967 European Indoor Games.\n"
    "\n"
    "Rows:\n"
    "1. | 1966 | European Indoor Games | Dortmund, West Germany | 1st | 400m | 47.9 |\n"
    "2. | 1967 | European Indoor Games | Prague, Czechoslovakia | 2nd | 400m | 48.6 |\n";

inline const std::string kRiceResponse =
    "Statements:\n"
    "1. Kidnapped: The Hannah Anderson Story was filmed in 2015.\n"
    "2. Isabella Rice played the role of Becca McKinnon in Kidnapped: The Hannah Anderson Story.\n"
    "3. Jem and the Holograms was filmed in 2015.\n"
    "4. Isabella Rice played the role of Young Jerrica Benton in Jem and the Holograms.\n"
    "5. Asomatous was filmed in 2015.\n"
    "6. Isabella Rice played the role of Sophie Gibbs in Asomatous.\n"
    "7. Unforgettable was filmed in 2017.\n"
    "8. Isabella Rice played the role of Lily in Unforgettable.\n"
    "9. Our Friend was filmed in 2019.\n"
    "10. Isabella Rice played the role of Molly in Our Friend.\n"
    "Rows:\n"
    "1. | 2015 | Kidnapped: The Hannah Anderson Story | Becca McKinnon | NaN |\n"
    "2. | 2015 | Jem and the Holograms | Young Jerrica Benton | NaN |\n"
    "3. | 2015 | Asomatous | Sophie Gibbs | NaN |\n"
    "4. | 2017 | Unforgettable | Lily | NaN |\n"
    "5. | 2019 | Our Friend | Molly | NaN |\n";

inline tabeval::Table koch() { return tabeval::parse_markdown(kKochMarkdown, "Koch"); }
inline tabeval::Table rice() { return tabeval::parse_markdown(kRiceMarkdown, "Isabella Rice - Film"); }

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(TABEVAL_TEST_DATA) / name; }

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("tabeval-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// httplib server on an ephemeral localhost port, stopped on destruction.
struct StubServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  template <typename Setup>
  explicit StubServer(Setup&& setup) {
    setup(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~StubServer() {
    server.stop();
    thread.join();
  }
  std::string url(const std::string& path = "") const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

// Chat-completions stub: reads the title and table back out of the prompt and
// answers with the deterministic statements in the Statements/Rows format.
struct LlmStub {
  std::atomic<int> requests{0};
  StubServer server{[this](httplib::Server& s) {
    s.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt = body.at("messages").at(0).at("content");
      res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", answer(prompt)}}}}}}}
                          .dump(),
                      "application/json");
    });
  }};

  std::string url() const { return server.url("/v1/chat/completions"); }

  static std::string answer(const std::string& prompt) {
    const auto title_at = prompt.rfind("Title: ") + 7;
    const auto title = prompt.substr(title_at, prompt.find('\n', title_at) - title_at);
    const auto table_md = prompt.substr(prompt.rfind("Table:\n") + 7);
    const auto table = tabeval::parse_markdown(table_md, title);
    tabeval::DeterministicUnroller u;
    std::string out = "Statements:\n";
    int i = 0;
    for (const auto& st : u.unroll(table).statements) out += std::to_string(++i) + ". " + st.text + "\n";
    out += "Rows:\n";
    const auto rendered = tabeval::render_markdown(table);
    std::size_t pos = 0, line = 0;
    i = 0;
    while (pos < rendered.size()) {
      auto end = rendered.find('\n', pos);
      if (end == std::string::npos) end = rendered.size();
      if (line++ >= 2) out += std::to_string(++i) + ". " + rendered.substr(pos, end - pos) + "\n";
      pos = end + 1;
    }
    return out;
  }
};

// Random table over a small vocabulary so that repeats and empties occur.
inline tabeval::Table random_table(std::mt19937& rng, std::size_t max_rows = 6, std::size_t max_cols = 6,
                                   std::size_t vocab = 4) {
  std::uniform_int_distribution<std::size_t> nrows(0, max_rows), ncols(1, max_cols), word(0, vocab);
  tabeval::Table t;
  t.intent = "Generated";
  const auto cols = ncols(rng);
  for (std::size_t c = 0; c < cols; ++c) t.column_headers.push_back("H" + std::to_string(c));
  const auto rows = nrows(rng);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<tabeval::Cell> row;
    for (std::size_t c = 0; c < cols; ++c) {
      const auto w = word(rng);
      row.push_back(w == 0 ? tabeval::Cell{} : tabeval::Cell{"v" + std::to_string(w), false});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fixtures
