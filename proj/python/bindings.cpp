#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparql_assist/assist_service.hpp"

namespace py = pybind11;
using namespace sparql_assist;

namespace {

py::tuple triple_tuple(const Triple& t) {
  return py::make_tuple(to_ntriples(t.subject), to_ntriples(Node(t.predicate)), to_ntriples(t.object));
}

py::list graph_list(const Graph& g) {
  py::list out;
  for (const auto& t : g) out.append(triple_tuple(t));
  return out;
}

py::dict context_dict(const QueryContext& ctx) {
  py::dict d;
  d["position"] = std::string(position_name(ctx.position));
  d["variables"] = ctx.variables;
  py::dict prefixes;
  for (const auto& [k, v] : ctx.prefixes) prefixes[py::str(k)] = v.str();
  d["prefixes"] = prefixes;
  d["partial_token"] = ctx.partial_token;
  d["focus_subject"] = ctx.focus_subject ? py::object(py::str(to_string(*ctx.focus_subject))) : py::object(py::none());
  py::list from, named;
  for (const auto& i : ctx.from_graphs) from.append(i.str());
  for (const auto& i : ctx.from_named) named.append(i.str());
  d["from_graphs"] = from;
  d["from_named"] = named;
  return d;
}

std::size_t cursor_or_end(const std::string& text, std::optional<std::size_t> cursor) {
  std::size_t c = cursor.value_or(text.size());
  if (c > text.size()) throw py::value_error("cursor is beyond the end of the text");
  return c;
}

SuggestRequest make_request(std::string query, std::optional<std::size_t> cursor,
                            std::optional<std::vector<std::string>> langs, std::optional<std::size_t> limit,
                            std::optional<bool> registry) {
  std::size_t c = cursor_or_end(query, cursor);
  return SuggestRequest{std::move(query), c, std::move(langs), limit, registry};
}

class PyService {
 public:
  PyService(const std::string& config_json, bool offline) {
    ServiceConfig cfg = parse_config(config_json);
    if (offline) cfg.fetch.allow_network = false;
    service_ = std::make_unique<AssistService>(std::move(cfg), http_fetcher());
    py::gil_scoped_release release;
    service_->start();
  }

  py::tuple suggest(std::string query, std::optional<std::size_t> cursor,
                    std::optional<std::vector<std::string>> langs, std::optional<std::size_t> limit,
                    std::optional<bool> registry) {
    SuggestRequest req = make_request(std::move(query), cursor, std::move(langs), limit, registry);
    SuggestOutcome out;
    {
      py::gil_scoped_release release;
      out = service_->handle_suggest(req);
    }
    return py::make_tuple(out.status, out.body);
  }

  py::tuple apply(std::string query, std::optional<std::size_t> cursor, std::size_t index,
                  std::optional<std::vector<std::string>> langs, std::optional<std::size_t> limit,
                  std::optional<bool> registry) {
    SuggestRequest req = make_request(std::move(query), cursor, std::move(langs), limit, registry);
    std::optional<Splice> spliced;
    {
      py::gil_scoped_release release;
      QueryContext ctx = derive_context(req.query, req.cursor);
      service_->ensure_loaded(ctx.from_graphs, service_->config().from_budget);
      auto kb = service_->snapshot();
      auto list = sparql_assist::suggest(ctx, *kb, service_->registry(), service_->options_for(req));
      if (index < list.size()) spliced = apply_suggestion(req.query, req.cursor, ctx, list[index]);
    }
    if (!spliced) throw py::index_error("no suggestion at index " + std::to_string(index));
    return py::make_tuple(spliced->text, spliced->cursor);
  }

  py::tuple load_graph(const std::string& iri) {
    GraphOutcome out;
    std::string body = "{\"iri\":" + py::module_::import("json").attr("dumps")(iri).cast<std::string>() + "}";
    {
      py::gil_scoped_release release;
      out = service_->handle_load_graph(body);
    }
    return py::make_tuple(out.status, out.body);
  }

  bool ready() const { return service_->ready(); }
  std::string ready_body() const { return service_->ready_body(); }
  std::uint64_t generation() const { return service_->snapshot()->index.generation(); }
  std::size_t term_count() const { return service_->snapshot()->index.term_count(); }

 private:
  std::unique_ptr<AssistService> service_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SPARQL autocompletion core";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("normalize_label", [](const std::string& s) { return normalize_label(s); },
        "Case-folded, NFKD-normalized, mark-stripped search key.");

  m.def("tokenize", [](const std::string& text) {
    py::list out;
    for (const auto& t : tokenize(text)) {
      py::dict d;
      d["kind"] = std::string(token_kind_name(t.kind));
      d["text"] = t.text;
      d["start"] = t.start;
      d["end"] = t.end;
      out.append(d);
    }
    return out;
  });

  m.def("derive_context",
        [](const std::string& text, std::optional<std::size_t> cursor) {
          return context_dict(derive_context(text, cursor_or_end(text, cursor)));
        },
        py::arg("text"), py::arg("cursor") = py::none());

  m.def("parse_turtle",
        [](const std::string& text, std::optional<std::string> base) {
          std::optional<Iri> b;
          if (base) b = Iri(*base);
          return graph_list(parse_turtle(text, b));
        },
        py::arg("text"), py::arg("base") = py::none(), "Triples as N-Triples term strings.");

  m.def("parse_ntriples", [](const std::string& text) { return graph_list(parse_ntriples(text).graph); });

  py::class_<PyService>(m, "_Service")
      .def(py::init<const std::string&, bool>(), py::arg("config_json") = "{}", py::arg("offline") = false)
      .def("suggest", &PyService::suggest, py::arg("query"), py::arg("cursor") = py::none(),
           py::arg("langs") = py::none(), py::arg("limit") = py::none(), py::arg("registry") = py::none())
      .def("apply", &PyService::apply, py::arg("query"), py::arg("cursor"), py::arg("index"),
           py::arg("langs") = py::none(), py::arg("limit") = py::none(), py::arg("registry") = py::none())
      .def("load_graph", &PyService::load_graph)
      .def("ready", &PyService::ready)
      .def("ready_body", &PyService::ready_body)
      .def_property_readonly("generation", &PyService::generation)
      .def_property_readonly("term_count", &PyService::term_count);
}
