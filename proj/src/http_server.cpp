#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "httplib.h"
#include "sparql_assist/assist_service.hpp"

namespace sparql_assist {

namespace {

constexpr const char* kJson = "application/json";

bool is_loopback(const std::string& addr) {
  return addr == "127.0.0.1" || addr == "::1" || addr == "::ffff:127.0.0.1" || addr.rfind("127.", 0) == 0;
}

std::string format_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

}  // namespace

struct HttpServer::Impl {
  AssistService& service;
  httplib::Server server;

  explicit Impl(AssistService& s) : service(s) {}
};

HttpServer::HttpServer(AssistService& service, bool log_requests) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  AssistService& svc = impl_->service;
  srv.set_tcp_nodelay(true);
  srv.set_payload_max_length(svc.config().limits.max_query_bytes * 4 + 4096);

  srv.Post("/suggest", [&svc](const httplib::Request& req, httplib::Response& res) {
    SuggestOutcome out = svc.handle_suggest(req.body);
    res.status = out.status;
    res.set_header("X-Cache", out.cache_hit ? "hit" : "miss");
    res.set_header("X-Timing-Ms", format_ms(out.timing_ms));
    res.set_header("X-Generation", std::to_string(out.generation));
    res.set_content(out.body, kJson);
  });

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", kJson);
  });

  srv.Get("/ready", [&svc](const httplib::Request&, httplib::Response& res) {
    res.status = svc.ready() ? 200 : 503;
    res.set_content(svc.ready_body(), kJson);
  });

  srv.Get("/version", [&svc](const httplib::Request&, httplib::Response& res) {
    res.set_content(svc.version_body(), kJson);
  });

  srv.Post("/graphs", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (!svc.config().allow_remote_admin && !is_loopback(req.remote_addr)) {
      res.status = 403;
      res.set_content(error_body(ApiError{403, "forbidden", "graph loading is limited to loopback clients"}), kJson);
      return;
    }
    GraphOutcome out = svc.handle_load_graph(req.body);
    res.status = out.status;
    res.set_content(out.body, kJson);
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    std::string code = res.status == 404   ? "not_found"
                       : res.status == 413 ? "payload_too_large"
                       : res.status == 405 ? "method_not_allowed"
                                           : "error";
    res.set_content(error_body(ApiError{res.status, code, httplib::status_message(res.status)}), kJson);
  });

  if (log_requests) {
    srv.set_logger([&svc](const httplib::Request& req, const httplib::Response& res) {
      std::string timing = res.has_header("X-Timing-Ms") ? res.get_header_value("X-Timing-Ms") : "-";
      std::string generation = res.has_header("X-Generation") ? res.get_header_value("X-Generation")
                                                              : std::to_string(svc.snapshot()->index.generation());
      std::cerr << req.method << ' ' << req.path << ' ' << res.status << ' ' << timing << "ms gen=" << generation
                << '\n';
    });
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace sparql_assist
