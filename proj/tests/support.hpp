#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sparql_assist/rdf_model.hpp"

namespace test_support {

inline std::string fixture_path(const std::string& name) { return std::string(SPARQL_ASSIST_FIXTURES) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

using sparql_assist::BlankNode;
using sparql_assist::Graph;
using sparql_assist::Node;
using sparql_assist::Triple;

inline Node rename(const Node& n, const std::map<std::string, std::string>& m) {
  if (auto* b = std::get_if<BlankNode>(&n)) return BlankNode{m.at(b->label)};
  return n;
}

inline std::vector<std::string> blanks_of(const Graph& g) {
  std::set<std::string> out;
  for (const auto& t : g) {
    if (auto* b = std::get_if<BlankNode>(&t.subject)) out.insert(b->label);
    if (auto* b = std::get_if<BlankNode>(&t.object)) out.insert(b->label);
  }
  return {out.begin(), out.end()};
}

// Ground triple signature of a blank node: its edges with other blanks masked.
inline std::multiset<std::string> signature(const Graph& g, const std::string& label) {
  std::multiset<std::string> sig;
  auto mask = [&](const Node& n) {
    if (auto* b = std::get_if<BlankNode>(&n)) return std::string(b->label == label ? "@self" : "@blank");
    return sparql_assist::to_ntriples(n);
  };
  for (const auto& t : g) {
    bool s = is_blank(t.subject) && std::get<BlankNode>(t.subject).label == label;
    bool o = is_blank(t.object) && std::get<BlankNode>(t.object).label == label;
    if (s || o) sig.insert(mask(t.subject) + " " + t.predicate.str() + " " + mask(t.object));
  }
  return sig;
}

inline bool extend(const Graph& a, const Graph& b, const std::vector<std::string>& la, std::size_t i,
                   std::map<std::string, std::string>& m, std::set<std::string>& used,
                   const std::vector<std::string>& lb) {
  if (i == la.size()) {
    Graph renamed;
    for (const auto& t : a) renamed.insert(Triple(rename(t.subject, m), t.predicate, rename(t.object, m)));
    return renamed == b;
  }
  auto sa = signature(a, la[i]);
  for (const auto& cand : lb) {
    if (used.count(cand) || signature(b, cand) != sa) continue;
    m[la[i]] = cand;
    used.insert(cand);
    if (extend(a, b, la, i + 1, m, used, lb)) return true;
    used.erase(cand);
    m.erase(la[i]);
  }
  return false;
}

}  // namespace detail

/// Graph equality with blank nodes compared up to a consistent relabeling.
inline bool isomorphic(const sparql_assist::Graph& a, const sparql_assist::Graph& b) {
  if (a.size() != b.size()) return false;
  auto la = detail::blanks_of(a);
  auto lb = detail::blanks_of(b);
  if (la.size() != lb.size()) return false;
  std::map<std::string, std::string> m;
  std::set<std::string> used;
  return detail::extend(a, b, la, 0, m, used, lb);
}

}  // namespace test_support
