#pragma once

#include <insight/errors.hpp>

#include <map>
#include <string>

namespace insight::http {

/// Network or protocol failure talking to a remote endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::map<std::string, std::string>;

/// Blocking requests against an absolute http(s) URL. Throw
/// TransportError when no response arrives; HTTP error statuses are
/// returned, not thrown.
Response get(const std::string& url, const Headers& headers = {}, int timeout_seconds = 30);
Response post_json(const std::string& url, const std::string& body, const Headers& headers = {},
                   int timeout_seconds = 120);

/// Percent-encodes a query-string component.
std::string url_encode(const std::string& s);

}  // namespace insight::http
