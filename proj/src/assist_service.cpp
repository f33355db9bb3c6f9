#include "sparql_assist/assist_service.hpp"

#include <condition_variable>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace sparql_assist {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

void ServiceConfig::validate() const {
  if (listen_port < 1 || listen_port > 65535) throw std::invalid_argument("listen_port must be in [1, 65535]");
  if (limits.max_query_bytes == 0) throw std::invalid_argument("limits.max_query_bytes must be positive");
  if (limits.default_limit == 0) throw std::invalid_argument("limits.default_limit must be positive");
  if (limits.max_limit < limits.default_limit) {
    throw std::invalid_argument("limits.max_limit must be >= limits.default_limit");
  }
  if (from_budget.count() < 0) throw std::invalid_argument("from_budget must not be negative");
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (endpoints[i].url.empty()) throw std::invalid_argument("endpoints[" + std::to_string(i) + "].url is empty");
    if (endpoints[i].page_size == 0) {
      throw std::invalid_argument("endpoints[" + std::to_string(i) + "].page_size must be >= 1");
    }
  }
  fetch.validate();
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad_field(where.empty() ? "config" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) bad_field(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(path, "wrong type");
  }
}

std::size_t get_size(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad_field(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<std::string> get_strings(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_array()) bad_field(path, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) bad_field(path, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

ServiceConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(doc, "",
             {"ontologies", "endpoints", "registry_path", "languages", "cache_dir", "listen_port", "fetch", "limits",
              "from_budget", "include_from_named", "allow_remote_admin", "memo_capacity"});
  ServiceConfig cfg;
  if (doc.contains("ontologies")) cfg.ontologies = get_strings(doc, "ontologies", "ontologies");
  if (doc.contains("endpoints")) {
    const json& eps = doc["endpoints"];
    if (!eps.is_array()) bad_field("endpoints", "expected an array");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      std::string path = "endpoints[" + std::to_string(i) + "]";
      check_keys(eps[i], path, {"url", "default_graph", "page_size", "row_cap"});
      if (!eps[i].contains("url")) bad_field(path + ".url", "missing");
      EndpointSource src;
      src.url = get_field<std::string>(eps[i], "url", path + ".url");
      if (eps[i].contains("default_graph")) {
        std::string g = get_field<std::string>(eps[i], "default_graph", path + ".default_graph");
        if (!is_valid_iri(g)) bad_field(path + ".default_graph", "not an IRI");
        src.default_graph = Iri(g);
      }
      if (eps[i].contains("page_size")) src.page_size = get_size(eps[i], "page_size", path + ".page_size");
      if (eps[i].contains("row_cap")) src.row_cap = get_size(eps[i], "row_cap", path + ".row_cap");
      cfg.endpoints.push_back(std::move(src));
    }
  }
  if (doc.contains("registry_path")) cfg.registry_path = get_field<std::string>(doc, "registry_path", "registry_path");
  if (doc.contains("languages")) cfg.languages = get_strings(doc, "languages", "languages");
  if (doc.contains("cache_dir")) {
    cfg.cache_dir = get_field<std::string>(doc, "cache_dir", "cache_dir");
    cfg.fetch.cache_dir = cfg.cache_dir;
  }
  if (doc.contains("listen_port")) {
    const json& v = doc["listen_port"];
    if (!v.is_number_integer()) bad_field("listen_port", "expected an integer");
    cfg.listen_port = v.get<int>();
  }
  if (doc.contains("fetch")) {
    const json& f = doc["fetch"];
    check_keys(f, "fetch", {"timeout", "max_bytes", "cache_dir", "cache_ttl", "allow_network"});
    if (f.contains("timeout")) cfg.fetch.timeout = std::chrono::milliseconds(get_size(f, "timeout", "fetch.timeout"));
    if (f.contains("max_bytes")) cfg.fetch.max_bytes = get_size(f, "max_bytes", "fetch.max_bytes");
    if (f.contains("cache_dir")) cfg.fetch.cache_dir = get_field<std::string>(f, "cache_dir", "fetch.cache_dir");
    if (f.contains("cache_ttl")) cfg.fetch.cache_ttl = std::chrono::seconds(get_size(f, "cache_ttl", "fetch.cache_ttl"));
    if (f.contains("allow_network")) cfg.fetch.allow_network = get_field<bool>(f, "allow_network", "fetch.allow_network");
  }
  if (doc.contains("limits")) {
    const json& l = doc["limits"];
    check_keys(l, "limits", {"max_query_bytes", "default_limit", "max_limit"});
    if (l.contains("max_query_bytes")) cfg.limits.max_query_bytes = get_size(l, "max_query_bytes", "limits.max_query_bytes");
    if (l.contains("default_limit")) cfg.limits.default_limit = get_size(l, "default_limit", "limits.default_limit");
    if (l.contains("max_limit")) cfg.limits.max_limit = get_size(l, "max_limit", "limits.max_limit");
  }
  if (doc.contains("from_budget")) cfg.from_budget = std::chrono::milliseconds(get_size(doc, "from_budget", "from_budget"));
  if (doc.contains("include_from_named")) {
    cfg.include_from_named = get_field<bool>(doc, "include_from_named", "include_from_named");
  }
  if (doc.contains("allow_remote_admin")) {
    cfg.allow_remote_admin = get_field<bool>(doc, "allow_remote_admin", "allow_remote_admin");
  }
  if (doc.contains("memo_capacity")) cfg.memo_capacity = get_size(doc, "memo_capacity", "memo_capacity");
  cfg.validate();
  return cfg;
}

ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Wire format

namespace {

ApiError api_error(int status, std::string code, std::string message) {
  return ApiError{status, std::move(code), std::move(message)};
}

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

std::variant<SuggestRequest, ApiError> parse_suggest_request(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return api_error(400, "malformed_json", e.what());
  }
  if (!doc.is_object()) return api_error(400, "invalid_request", "body must be a JSON object");
  SuggestRequest req;
  if (!doc.contains("query") || !doc["query"].is_string()) {
    return api_error(400, "invalid_request", "query must be a string");
  }
  req.query = doc["query"].get<std::string>();
  if (!doc.contains("cursor") || !doc["cursor"].is_number_integer()) {
    return api_error(400, "invalid_request", "cursor must be an integer");
  }
  if (doc["cursor"].get<long long>() < 0) return api_error(400, "cursor_out_of_range", "cursor is negative");
  req.cursor = doc["cursor"].get<std::size_t>();
  if (doc.contains("langs") && !doc["langs"].is_null()) {
    if (!doc["langs"].is_array()) return api_error(400, "invalid_request", "langs must be an array of strings");
    std::vector<std::string> langs;
    for (const auto& l : doc["langs"]) {
      if (!l.is_string()) return api_error(400, "invalid_request", "langs must be an array of strings");
      langs.push_back(l.get<std::string>());
    }
    req.langs = std::move(langs);
  }
  if (doc.contains("limit") && !doc["limit"].is_null()) {
    if (!doc["limit"].is_number_integer()) return api_error(400, "invalid_request", "limit must be an integer");
    if (doc["limit"].get<long long>() < 1) return api_error(400, "limit_out_of_range", "limit must be >= 1");
    req.limit = doc["limit"].get<std::size_t>();
  }
  if (doc.contains("registry") && !doc["registry"].is_null()) {
    if (!doc["registry"].is_boolean()) return api_error(400, "invalid_request", "registry must be a boolean");
    req.registry = doc["registry"].get<bool>();
  }
  return req;
}

std::string serialize_response(const QueryContext& ctx, const std::vector<Suggestion>& suggestions,
                               std::uint64_t generation) {
  auto iris = [](const std::vector<Iri>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& i : v) a.push_back(i.str());
    return a;
  };
  ordered_json context;
  context["position"] = std::string(position_name(ctx.position));
  context["variables"] = ctx.variables;
  context["from_graphs"] = iris(ctx.from_graphs);
  context["from_named"] = iris(ctx.from_named);
  context["partial_token"] = ctx.partial_token;
  context["focus_subject"] = ctx.focus_subject ? ordered_json(to_string(*ctx.focus_subject)) : ordered_json(nullptr);

  ordered_json list = ordered_json::array();
  for (const auto& s : suggestions) {
    ordered_json item;
    item["insert_text"] = s.insert_text;
    item["display_label"] = s.display_label;
    item["description"] = s.description ? ordered_json(*s.description) : ordered_json(nullptr);
    item["iri"] = s.iri ? ordered_json(s.iri->str()) : ordered_json(nullptr);
    item["kind"] = std::string(term_kind_name(s.kind));
    item["lang"] = s.lang;
    ordered_json prov;
    prov["kind"] = std::string(provenance_name(s.provenance.kind));
    prov["iri"] = s.provenance.iri ? ordered_json(s.provenance.iri->str()) : ordered_json(nullptr);
    item["provenance"] = std::move(prov);
    list.push_back(std::move(item));
  }

  ordered_json doc;
  doc["context"] = std::move(context);
  doc["suggestions"] = std::move(list);
  doc["generation"] = generation;
  return dump(doc);
}

std::string error_body(const ApiError& e) {
  ordered_json doc;
  doc["error"]["code"] = e.code;
  doc["error"]["message"] = e.message;
  return dump(doc);
}

// ---------------------------------------------------------------------------
// Service

struct AssistService::State : std::enable_shared_from_this<AssistService::State> {
  ServiceConfig config;
  Fetcher fetcher;
  std::atomic<std::size_t> fetches{0};
  std::optional<Registry> registry;
  std::vector<std::pair<std::string, std::string>> startup_failures;  // (source, reason)
  LangPref default_langs;

  mutable std::mutex mu;
  mutable std::condition_variable idle_cv;
  std::shared_ptr<const KnowledgeBase> kb = std::make_shared<const KnowledgeBase>();
  std::map<std::string, std::shared_future<void>> inflight;

  std::mutex write_mu;
  LruCache<std::string, std::string> memo;
  std::atomic<bool> ready{false};

  State(ServiceConfig cfg, Fetcher f)
      : config(std::move(cfg)), default_langs(config.languages), memo(config.memo_capacity) {
    fetcher = [this, f = std::move(f)](const FetchRequest& req) {
      ++fetches;
      if (!f) return FetchResponse{0, "", "", "no fetcher configured"};
      return f(req);
    };
  }

  std::shared_ptr<const KnowledgeBase> current() const {
    std::lock_guard<std::mutex> lock(mu);
    return kb;
  }

  template <typename Fn>
  void publish(Fn&& update) {
    std::lock_guard<std::mutex> wlock(write_mu);
    auto next = std::make_shared<const KnowledgeBase>(update(*current()));
    {
      std::lock_guard<std::mutex> lock(mu);
      kb = std::move(next);
    }
    memo.clear();
  }

  void load_async(const Iri& iri, std::shared_ptr<std::promise<void>> done) {
    auto self = shared_from_this();
    std::thread([self, iri, done] {
      try {
        LoadResult r = load_graph(iri.str(), self->config.fetch, self->fetcher);
        self->publish([&](const KnowledgeBase& base) {
          if (r.status.state == LoadState::kLoaded) {
            r.graph.set_source(iri);
            return add_graph(base, r.graph, iri.str(), r.status);
          }
          KnowledgeBase next = base;
          next.loaded_graphs[iri.str()] = r.status;
          return next;
        });
      } catch (const std::exception& e) {
        self->publish([&](const KnowledgeBase& base) {
          KnowledgeBase next = base;
          next.loaded_graphs[iri.str()] =
              LoadStatus{LoadState::kFailed, e.what(), 0, std::chrono::system_clock::now()};
          return next;
        });
      }
      {
        std::lock_guard<std::mutex> lock(self->mu);
        self->inflight.erase(iri.str());
      }
      self->idle_cv.notify_all();
      done->set_value();
    }).detach();
  }
};

AssistService::AssistService(ServiceConfig config, Fetcher fetcher)
    : state_(std::make_shared<State>(std::move(config), std::move(fetcher))) {}

AssistService::~AssistService() = default;

void AssistService::start() {
  State& st = *state_;
  KnowledgeBase kb;
  if (st.config.registry_path) {
    try {
      st.registry = load_registry(*st.config.registry_path);
    } catch (const std::exception& e) {
      st.startup_failures.emplace_back(*st.config.registry_path, e.what());
      std::cerr << "registry " << *st.config.registry_path << " failed: " << e.what() << "\n";
    }
  }
  for (const auto& source : st.config.ontologies) {
    LoadResult r = load_graph(source, st.config.fetch, st.fetcher);
    if (r.status.state == LoadState::kLoaded) {
      kb = add_graph(kb, r.graph, source, r.status);
    } else {
      kb.loaded_graphs[source] = r.status;
      std::cerr << "ontology " << source << " failed: " << r.status.reason << "\n";
    }
  }
  for (const auto& ep : st.config.endpoints) {
    EndpointResult r = preload_endpoint(ep, st.config.fetch, st.fetcher);
    if (!r.terms.empty()) kb.index = swap_generation(kb.index, std::move(r.terms));
    kb.loaded_graphs[ep.url] = r.status;
    if (r.status.state == LoadState::kFailed) {
      std::cerr << "endpoint " << ep.url << " failed: " << r.status.reason << "\n";
    }
  }
  st.publish([&](const KnowledgeBase&) { return std::move(kb); });
  st.ready = true;
}

bool AssistService::ready() const noexcept { return state_->ready; }
std::shared_ptr<const KnowledgeBase> AssistService::snapshot() const { return state_->current(); }
const Registry* AssistService::registry() const noexcept {
  return state_->registry ? &*state_->registry : nullptr;
}
const ServiceConfig& AssistService::config() const noexcept { return state_->config; }
std::size_t AssistService::fetch_count() const noexcept { return state_->fetches; }
std::size_t AssistService::memo_size() const { return state_->memo.size(); }

SuggestOptions AssistService::options_for(const SuggestRequest& req) const {
  SuggestOptions opts;
  opts.langs = req.langs ? LangPref(*req.langs) : state_->default_langs;
  opts.limit = req.limit.value_or(state_->config.limits.default_limit);
  opts.registry_enabled = req.registry.value_or(state_->registry.has_value());
  return opts;
}

void AssistService::ensure_loaded(const std::vector<Iri>& sources, std::chrono::milliseconds budget) {
  State& st = *state_;
  std::vector<std::shared_future<void>> waits;
  {
    std::lock_guard<std::mutex> lock(st.mu);
    auto now = std::chrono::system_clock::now();
    for (const Iri& iri : sources) {
      auto status = st.kb->loaded_graphs.find(iri.str());
      if (status != st.kb->loaded_graphs.end() &&
          (status->second.state != LoadState::kFailed || now - status->second.at < st.config.fetch.cache_ttl)) {
        continue;
      }
      auto running = st.inflight.find(iri.str());
      if (running != st.inflight.end()) {
        waits.push_back(running->second);
        continue;
      }
      auto done = std::make_shared<std::promise<void>>();
      auto fut = done->get_future().share();
      st.inflight.emplace(iri.str(), fut);
      waits.push_back(fut);
      st.load_async(iri, done);
    }
  }
  auto deadline = std::chrono::steady_clock::now() + budget;
  for (auto& f : waits) f.wait_until(deadline);
}

bool AssistService::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock<std::mutex> lock(state_->mu);
  return state_->idle_cv.wait_for(lock, timeout, [&] { return state_->inflight.empty(); });
}

SuggestOutcome AssistService::handle_suggest(std::string_view body) {
  auto start = std::chrono::steady_clock::now();
  SuggestOutcome out;
  if (body.size() > state_->config.limits.max_query_bytes) {
    out.status = 413;
    out.body = error_body(api_error(413, "payload_too_large", "request body exceeds limits.max_query_bytes"));
  } else {
    auto parsed = parse_suggest_request(body);
    if (auto* err = std::get_if<ApiError>(&parsed)) {
      out.status = err->status;
      out.body = error_body(*err);
    } else {
      return handle_suggest(std::get<SuggestRequest>(parsed));
    }
  }
  out.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SuggestOutcome AssistService::handle_suggest(const SuggestRequest& req) {
  auto start = std::chrono::steady_clock::now();
  State& st = *state_;
  SuggestOutcome out;
  auto fail = [&](ApiError e) {
    out.status = e.status;
    out.body = error_body(e);
    out.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  };
  if (req.query.size() > st.config.limits.max_query_bytes) {
    return fail(api_error(413, "payload_too_large", "query exceeds limits.max_query_bytes"));
  }
  if (req.cursor > req.query.size()) {
    return fail(api_error(400, "cursor_out_of_range", "cursor is beyond the end of the query"));
  }
  if (req.cursor < req.query.size() && (static_cast<unsigned char>(req.query[req.cursor]) & 0xC0) == 0x80) {
    return fail(api_error(400, "cursor_not_char_boundary", "cursor splits a UTF-8 sequence"));
  }
  if (req.limit && (*req.limit < 1 || *req.limit > st.config.limits.max_limit)) {
    return fail(api_error(400, "limit_out_of_range",
                          "limit must be in [1, " + std::to_string(st.config.limits.max_limit) + "]"));
  }

  SuggestOptions opts = options_for(req);
  QueryContext ctx = derive_context(req.query, req.cursor);
  std::vector<Iri> sources = ctx.from_graphs;
  if (st.config.include_from_named) sources.insert(sources.end(), ctx.from_named.begin(), ctx.from_named.end());
  if (!sources.empty()) ensure_loaded(sources, st.config.from_budget);

  auto kb = st.current();
  std::uint64_t generation = kb->index.generation();
  std::string key = std::to_string(generation) + '\x1f';
  for (const auto& l : opts.langs.langs()) key += l + ',';
  key += '\x1f' + std::to_string(opts.limit) + '\x1f' + (opts.registry_enabled ? '1' : '0') + '\x1f' +
         sha256_hex(std::string_view(req.query).substr(0, req.cursor));

  out.generation = generation;
  if (auto hit = st.memo.get(key)) {
    out.body = std::move(*hit);
    out.cache_hit = true;
  } else {
    auto suggestions = suggest(ctx, *kb, registry(), opts);
    out.body = serialize_response(ctx, suggestions, generation);
    st.memo.put(key, out.body);
  }
  out.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

GraphOutcome AssistService::handle_load_graph(std::string_view body) {
  GraphOutcome out;
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    out.status = 400;
    out.body = error_body(api_error(400, "malformed_json", e.what()));
    return out;
  }
  if (!doc.is_object() || !doc.contains("iri") || !doc["iri"].is_string()) {
    out.status = 400;
    out.body = error_body(api_error(400, "invalid_request", "iri must be a string"));
    return out;
  }
  std::string iri = doc["iri"].get<std::string>();
  if (!is_valid_iri(iri) || !has_scheme(iri)) {
    out.status = 400;
    out.body = error_body(api_error(400, "invalid_iri", "not an absolute IRI: " + iri));
    return out;
  }
  ensure_loaded({Iri(iri)}, state_->config.from_budget);
  auto kb = state_->current();
  ordered_json res;
  res["iri"] = iri;
  auto it = kb->loaded_graphs.find(iri);
  if (it == kb->loaded_graphs.end()) {
    res["status"] = "pending";
  } else {
    res["status"] = std::string(load_state_name(it->second.state));
    if (!it->second.reason.empty()) res["reason"] = it->second.reason;
    res["triples"] = it->second.triples;
  }
  res["term_count"] = kb->index.term_count();
  res["generation"] = kb->index.generation();
  out.body = dump(res);
  return out;
}

std::string AssistService::ready_body() const {
  auto kb = state_->current();
  ordered_json res;
  res["ready"] = ready();
  res["generation"] = kb->index.generation();
  res["term_count"] = kb->index.term_count();
  ordered_json sources = ordered_json::array();
  ordered_json failed = ordered_json::array();
  std::size_t loaded = 0;
  for (const auto& [source, status] : kb->loaded_graphs) {
    ordered_json s;
    s["source"] = source;
    s["status"] = std::string(load_state_name(status.state));
    s["triples"] = status.triples;
    if (!status.reason.empty()) s["reason"] = status.reason;
    if (status.state == LoadState::kLoaded) ++loaded;
    if (status.state == LoadState::kFailed) failed.push_back(source);
    sources.push_back(std::move(s));
  }
  for (const auto& [source, reason] : state_->startup_failures) failed.push_back(source);
  ordered_json pending = ordered_json::array();
  {
    std::lock_guard<std::mutex> lock(state_->mu);
    for (const auto& [source, fut] : state_->inflight) pending.push_back(source);
  }
  res["loaded_count"] = loaded;
  res["sources"] = std::move(sources);
  res["failed_sources"] = std::move(failed);
  res["pending"] = std::move(pending);
  res["registry_services"] = state_->registry ? state_->registry->services().size() : 0;
  return dump(res);
}

std::string AssistService::version_body() const {
  ordered_json res;
  res["name"] = "sparql-assist";
  res["version"] = std::string(kVersion);
  return dump(res);
}

}  // namespace sparql_assist
