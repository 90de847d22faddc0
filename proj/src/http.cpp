#include "tabeval/http.hpp"

#include <httplib.h>

#include "tabeval/error.hpp"

namespace tabeval {

Endpoint parse_endpoint(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("endpoint URL lacks a scheme: " + std::string(url));
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme: " + std::string(scheme));
  auto slash = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, slash));
  ep.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  if (ep.origin.size() <= scheme_end + 3) throw ConfigError("endpoint URL lacks a host: " + std::string(url));
  return ep;
}

HttpPool::HttpPool(std::string origin, std::chrono::milliseconds timeout)
    : origin_(std::move(origin)), timeout_(timeout) {}

HttpPool::~HttpPool() = default;

std::unique_ptr<httplib::Client> HttpPool::acquire() {
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      auto c = std::move(idle_.back());
      idle_.pop_back();
      return c;
    }
  }
  auto c = std::make_unique<httplib::Client>(origin_);
  c->set_keep_alive(true);
  c->set_connection_timeout(timeout_);
  c->set_read_timeout(timeout_);
  c->set_write_timeout(timeout_);
  return c;
}

void HttpPool::release(std::unique_ptr<httplib::Client> client) {
  std::lock_guard lock(mu_);
  idle_.push_back(std::move(client));
}

std::string HttpPool::post_json(const std::string& path, const std::string& body,
                                const std::vector<std::pair<std::string, std::string>>& headers) {
  auto client = acquire();
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client->Post(path, h, body, "application/json");
  if (!res) throw BackendUnavailable(origin_ + path + ": " + httplib::to_string(res.error()));
  auto status = res->status;
  auto payload = res->body;
  release(std::move(client));
  if (status < 200 || status >= 300)
    throw BackendUnavailable(origin_ + path + ": HTTP " + std::to_string(status));
  return payload;
}

}  // namespace tabeval
