#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparql_assist/knowledge_loader.hpp"
#include "sparql_assist/lru_cache.hpp"
#include "sparql_assist/suggestion_engine.hpp"

namespace sparql_assist {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kConfigEnvVar = "SPARQL_ASSIST_CONFIG";

struct ServiceLimits {
  std::size_t max_query_bytes = 64 * 1024;
  std::size_t default_limit = 20;
  std::size_t max_limit = 100;
};

struct ServiceConfig {
  std::vector<std::string> ontologies;
  std::vector<EndpointSource> endpoints;
  std::optional<std::string> registry_path;
  std::vector<std::string> languages{"en"};
  std::string cache_dir;
  int listen_port = 8080;
  FetchPolicy fetch;
  ServiceLimits limits;
  std::chrono::milliseconds from_budget{2000};
  bool include_from_named = true;
  bool allow_remote_admin = false;
  std::size_t memo_capacity = 1024;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Parses the JSON config format. Unknown fields are rejected. Throws
/// std::invalid_argument naming the offending field.
ServiceConfig parse_config(std::string_view json_text);
ServiceConfig load_config(const std::string& path);

/// A request failure with its HTTP status and machine-readable code.
struct ApiError {
  int status = 400;
  std::string code;
  std::string message;
};

struct SuggestRequest {
  std::string query;
  std::size_t cursor = 0;
  std::optional<std::vector<std::string>> langs;
  std::optional<std::size_t> limit;
  std::optional<bool> registry;
};

/// Parses a POST /suggest body. Returns an error for malformed JSON or
/// fields of the wrong type; range checks happen in the service.
std::variant<SuggestRequest, ApiError> parse_suggest_request(std::string_view body);

/// The response body for a computed suggestion list. The HTTP layer and
/// in-process callers share this serializer.
std::string serialize_response(const QueryContext& ctx, const std::vector<Suggestion>& suggestions,
                               std::uint64_t generation);

std::string error_body(const ApiError& e);

struct SuggestOutcome {
  int status = 200;
  std::string body;
  bool cache_hit = false;
  double timing_ms = 0;
  std::uint64_t generation = 0;
};

struct GraphOutcome {
  int status = 200;
  std::string body;
};

/// Owns the knowledge-base snapshot, the registry and the response memo.
/// Thread-safe.
class AssistService {
 public:
  AssistService(ServiceConfig config, Fetcher fetcher);
  ~AssistService();
  AssistService(const AssistService&) = delete;
  AssistService& operator=(const AssistService&) = delete;

  /// Loads the registry and preloads ontologies and endpoints, then marks
  /// the service ready. Failures are recorded, not thrown.
  void start();

  bool ready() const noexcept;
  std::shared_ptr<const KnowledgeBase> snapshot() const;
  const Registry* registry() const noexcept;
  const ServiceConfig& config() const noexcept;

  SuggestOutcome handle_suggest(std::string_view body);
  SuggestOutcome handle_suggest(const SuggestRequest& req);
  GraphOutcome handle_load_graph(std::string_view body);

  std::string ready_body() const;
  std::string version_body() const;

  /// Options a request resolves to (defaults from the config).
  SuggestOptions options_for(const SuggestRequest& req) const;

  /// Starts loads for `sources` not yet attempted (or failed longer than the
  /// TTL ago) and waits for them up to `budget`. Loads that miss the budget
  /// keep running and publish when done.
  void ensure_loaded(const std::vector<Iri>& sources, std::chrono::milliseconds budget);

  /// Waits until no background load is running; false on timeout.
  bool wait_idle(std::chrono::milliseconds timeout) const;

  /// Number of fetch calls made through the service's fetcher.
  std::size_t fetch_count() const noexcept;

  std::size_t memo_size() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// HTTP front end over an AssistService.
class HttpServer {
 public:
  explicit HttpServer(AssistService& service, bool log_requests = true);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sparql_assist
