#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparql_assist/assist_service.hpp"

namespace sa = sparql_assist;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> ontologies;
  std::vector<std::string> endpoints;
  std::string registry;
  std::vector<std::string> langs;
  std::string cache_dir;
  bool offline = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "JSON config file (default: $SPARQL_ASSIST_CONFIG)");
  cmd->add_option("-o,--ontology", f.ontologies, "Ontology file or URL to preload (repeatable)");
  cmd->add_option("-e,--endpoint", f.endpoints, "SPARQL endpoint URL to preload (repeatable)");
  cmd->add_option("-r,--registry", f.registry, "Service registry file");
  cmd->add_option("-l,--lang", f.langs, "Preferred label language, in order (repeatable)");
  cmd->add_option("--cache-dir", f.cache_dir, "Fetch cache directory");
  cmd->add_flag("--offline", f.offline, "Disable network access");
}

// Throws std::invalid_argument for a bad config, std::runtime_error if unreadable.
sa::ServiceConfig resolve_config(const CommonFlags& f) {
  sa::ServiceConfig cfg;
  std::string path = f.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(std::string(sa::kConfigEnvVar).c_str())) path = env;
  }
  if (!path.empty()) cfg = sa::load_config(path);
  for (const auto& o : f.ontologies) cfg.ontologies.push_back(o);
  for (const auto& e : f.endpoints) cfg.endpoints.push_back(sa::EndpointSource{e, std::nullopt, 1000, 50'000});
  if (!f.registry.empty()) cfg.registry_path = f.registry;
  if (!f.langs.empty()) cfg.languages = f.langs;
  if (!f.cache_dir.empty()) {
    cfg.cache_dir = f.cache_dir;
    cfg.fetch.cache_dir = f.cache_dir;
  }
  if (f.offline) cfg.fetch.allow_network = false;
  cfg.validate();
  return cfg;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

sa::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-sensitive SPARQL completion service"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sa::kVersion));

  CommonFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_common(serve, serve_flags);
  std::string host = "127.0.0.1";
  int port = 0;
  bool quiet = false;
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("-p,--port", port, "Listen port (overrides config listen_port)")->check(CLI::Range(1, 65535));
  serve->add_flag("-q,--quiet", quiet, "Do not log requests");

  CommonFlags suggest_flags;
  auto* suggest_cmd = app.add_subcommand("suggest", "Print suggestions for one query as JSON");
  add_common(suggest_cmd, suggest_flags);
  std::string query_file;
  long long cursor = -1;
  std::size_t limit = 0;
  bool no_registry = false;
  suggest_cmd->add_option("query_file", query_file, "File holding the partial query ('-' for stdin)")->required();
  suggest_cmd->add_option("--cursor", cursor, "Byte offset of the cursor (default: end of text)");
  suggest_cmd->add_option("-n,--limit", limit, "Maximum number of suggestions")->check(CLI::PositiveNumber);
  suggest_cmd->add_flag("--no-registry", no_registry, "Ignore the registry for this request");

  CommonFlags index_flags;
  auto* index_cmd = app.add_subcommand("index", "Load sources and report the index");
  add_common(index_cmd, index_flags);
  std::string dump_path;
  index_cmd->add_option("--dump", dump_path, "Write the index dump here ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CommonFlags& flags = serve->parsed() ? serve_flags : suggest_cmd->parsed() ? suggest_flags : index_flags;
  sa::ServiceConfig cfg;
  try {
    cfg = resolve_config(flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  if (suggest_cmd->parsed()) {
    std::string text;
    if (query_file == "-") {
      std::ostringstream ss;
      ss << std::cin.rdbuf();
      text = ss.str();
    } else if (!read_file(query_file, text)) {
      std::cerr << "cannot read " << query_file << "\n";
      return 1;
    }
    if (limit > cfg.limits.max_limit) cfg.limits.max_limit = limit;
    sa::AssistService service(cfg, sa::http_fetcher());
    service.start();
    sa::SuggestRequest req;
    req.query = text;
    req.cursor = cursor < 0 ? text.size() : static_cast<std::size_t>(cursor);
    if (limit > 0) req.limit = limit;
    if (no_registry) req.registry = false;
    sa::SuggestOutcome out = service.handle_suggest(req);
    if (out.status != 200) {
      std::cerr << out.body << "\n";
      return 2;
    }
    std::cout << out.body << "\n";
    return 0;
  }

  if (index_cmd->parsed()) {
    sa::AssistService service(cfg, sa::http_fetcher());
    service.start();
    auto kb = service.snapshot();
    std::cout << service.ready_body() << "\n";
    std::cerr << "terms: " << kb->index.term_count() << "\n";
    if (!dump_path.empty()) {
      if (dump_path == "-") {
        kb->index.dump(std::cout);
      } else {
        std::ofstream out(dump_path, std::ios::binary);
        if (!out) {
          std::cerr << "cannot write " << dump_path << "\n";
          return 1;
        }
        kb->index.dump(out);
      }
    }
    return 0;
  }

  if (port != 0) cfg.listen_port = port;
  sa::AssistService service(cfg, sa::http_fetcher());
  service.start();
  sa::HttpServer server(service, !quiet);
  int bound = server.bind(host, cfg.listen_port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << cfg.listen_port << "\n";
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << bound << " (" << service.snapshot()->index.term_count()
            << " terms)\n";
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}
