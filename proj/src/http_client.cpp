#include <insight/http_client.hpp>

#include <httplib.h>

#include <cstdio>

namespace insight::http {

namespace {

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

Target split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("not an absolute URL: '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw TransportError("unsupported scheme in '" + url + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw TransportError("built without TLS support; cannot reach '" + url + "'");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const Headers& h) {
  httplib::Headers out;
  for (const auto& [k, v] : h) out.emplace(k, v);
  return out;
}

template <typename Call>
Response perform(const std::string& url, int timeout_seconds, Call call) {
  const Target t = split_url(url);
  httplib::Client client(t.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  client.set_follow_location(true);
  httplib::Result res = call(client, t.path);
  if (!res) {
    throw TransportError("request to '" + url + "' failed: " + httplib::to_string(res.error()));
  }
  return Response{res->status, res->body};
}

}  // namespace

Response get(const std::string& url, const Headers& headers, int timeout_seconds) {
  return perform(url, timeout_seconds, [&](httplib::Client& c, const std::string& path) {
    return c.Get(path, to_headers(headers));
  });
}

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   int timeout_seconds) {
  return perform(url, timeout_seconds, [&](httplib::Client& c, const std::string& path) {
    return c.Post(path, to_headers(headers), body, "application/json");
  });
}

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace insight::http
