#include <chrono>
#include <string>

#include "httplib.h"
#include "sparql_assist/knowledge_loader.hpp"

namespace sparql_assist {

namespace {

constexpr int kMaxRedirects = 5;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path and query, at least "/"
};

std::optional<SplitUrl> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  auto path_start = url.find_first_of("/?#", scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (auto hash = out.path.find('#'); hash != std::string::npos) out.path.erase(hash);
  if (out.path.empty() || out.path.front() != '/') out.path.insert(out.path.begin(), '/');
  return out;
}

FetchResponse fetch_once(const std::string& url, const FetchRequest& req, std::string* location) {
  FetchResponse out;
  auto parts = split_url(url);
  if (!parts) {
    out.error = "malformed URL " + url;
    return out;
  }
  httplib::Client client(parts->origin);
  if (!client.is_valid()) {
    out.error = "unsupported URL " + url;
    return out;
  }
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(false);

  httplib::Headers headers{{"Accept", req.accept}};
  bool too_big = false;
  auto result = client.Get(
      parts->path, headers,
      [&](const httplib::Response& r) {
        out.status = r.status;
        out.content_type = r.get_header_value("Content-Type");
        if (r.status >= 300 && r.status < 400) *location = r.get_header_value("Location");
        return true;
      },
      [&](const char* data, std::size_t len) {
        out.body.append(data, len);
        if (out.body.size() > req.max_bytes) {
          too_big = true;
          return false;
        }
        return true;
      });
  if (too_big) {
    out.body.clear();
    out.error = "over size limit";
  } else if (!result) {
    out.error = httplib::to_string(result.error());
  }
  return out;
}

}  // namespace

Fetcher http_fetcher() {
  return [](const FetchRequest& req) {
    std::string url = req.url;
    for (int hop = 0;; ++hop) {
      std::string location;
      FetchResponse resp = fetch_once(url, req, &location);
      if (location.empty() || !resp.error.empty()) return resp;
      if (hop == kMaxRedirects) {
        resp.error = "too many redirects";
        return resp;
      }
      url = has_scheme(location) ? location : resolve_iri(url, location);
    }
  };
}

}  // namespace sparql_assist
