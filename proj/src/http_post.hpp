#pragma once

#include <chrono>
#include <string>

namespace defsim::detail {

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // no trailing slash, may be empty
};

// Accepts http:// and https:// URLs with an optional path prefix.
// Throws InvalidArgument.
Endpoint parse_endpoint(const std::string& url);

struct HttpResult {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

HttpResult post_json(const Endpoint& endpoint, const std::string& route, const std::string& body,
                     const std::string& bearer_token, std::chrono::milliseconds timeout);

// Reads an env var; empty when unset.
std::string env_or_empty(const char* name);

}  // namespace defsim::detail
