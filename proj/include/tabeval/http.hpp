#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace httplib {
class Client;
}

namespace tabeval {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

// Splits "http://host:port/path" into origin and path; throws ConfigError.
Endpoint parse_endpoint(std::string_view url);

// Small pool of keep-alive clients for one origin. post_json throws
// BackendUnavailable on transport failure or a non-2xx status.
class HttpPool {
 public:
  HttpPool(std::string origin, std::chrono::milliseconds timeout);
  ~HttpPool();

  std::string post_json(const std::string& path, const std::string& body,
                        const std::vector<std::pair<std::string, std::string>>& headers = {});

 private:
  std::unique_ptr<httplib::Client> acquire();
  void release(std::unique_ptr<httplib::Client> client);

  std::string origin_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

}  // namespace tabeval
