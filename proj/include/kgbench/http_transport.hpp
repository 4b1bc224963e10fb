#pragma once

#include <map>
#include <string>

#include <httplib.h>

#include "kgbench/gateway.hpp"

namespace kgbench {

// Real wire transport on top of cpp-httplib. The gateway owns retries and
// backoff; this only performs a single POST.
class HttplibTransport : public Transport {
 public:
  explicit HttplibTransport(double timeout_seconds = 30.0) : timeout_seconds_(timeout_seconds) {}

  HttpResult post(const std::string& url, const std::string& body,
                  const std::map<std::string, std::string>& headers) override {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return HttpResult{0, "invalid endpoint"};
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(static_cast<time_t>(timeout_seconds_), 0);
    client.set_read_timeout(static_cast<time_t>(timeout_seconds_), 0);
    client.set_write_timeout(static_cast<time_t>(timeout_seconds_), 0);

    httplib::Headers request_headers;
    std::string content_type = "application/json";
    for (const auto& [key, value] : headers) {
      if (key == "Content-Type") {
        content_type = value;
      } else {
        request_headers.emplace(key, value);
      }
    }
    auto result = client.Post(path, request_headers, body, content_type);
    if (!result) return HttpResult{0, ""};
    return HttpResult{result->status, result->body};
  }

 private:
  double timeout_seconds_;
};

}  // namespace kgbench
