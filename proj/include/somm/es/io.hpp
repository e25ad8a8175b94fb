#pragma once

// Serialisation of event structures: a JSON form for golden tests and
// machine output, and a DOT form for eyeballing. JSON keeps the full closed
// relations minus reflexive/symmetric redundancy; DOT shows the transitive
// reduction of program order so the picture stays readable.

#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "somm/error.hpp"
#include "somm/es/event_structure.hpp"

namespace somm::es {

inline nlohmann::ordered_json to_json(const EventStructure& es) {
  nlohmann::ordered_json j;
  j["events"] = nlohmann::ordered_json::array();
  for (const Event& e : es.events()) {
    nlohmann::ordered_json je;
    je["label"] = e.label;
    je["read"] = e.is_read;
    je["write"] = e.is_write;
    je["final"] = e.is_final;
    je["loc"] = e.loc;
    je["value"] = e.value;
    je["tid"] = e.tid;
    j["events"].push_back(std::move(je));
  }
  auto pairs = [](auto&& filter, const std::set<std::pair<int, int>>& rel) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [a, b] : rel)
      if (filter(a, b)) arr.push_back({a, b});
    return arr;
  };
  j["po"] = pairs([](int a, int b) { return a != b; }, es.po_pairs());
  j["conflict"] = pairs([](int a, int b) { return a < b; }, es.conflict_pairs());
  j["justifies"] = pairs([](int, int) { return true; }, es.justifies_pairs());
  return j;
}

inline std::string dump_json(const EventStructure& es, int indent = 2) {
  return to_json(es).dump(indent);
}

namespace detail {

struct RawParts {
  std::vector<Event> events;
  std::set<std::pair<int, int>> po, conflict, justifies;
};

inline RawParts parts_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("event structure json: ") + e.what());
  }
  RawParts out;
  try {
    for (const auto& je : j.at("events")) {
      Event e;
      e.label = je.value("label", std::string());
      e.is_read = je.value("read", false);
      e.is_write = je.value("write", false);
      e.is_final = je.value("final", false);
      e.loc = je.value("loc", std::string());
      e.value = je.value("value", 0);
      e.tid = je.value("tid", -1);
      out.events.push_back(std::move(e));
    }
    for (const auto& p : j.value("po", nlohmann::json::array()))
      out.po.emplace(p.at(0).get<int>(), p.at(1).get<int>());
    for (const auto& p : j.value("conflict", nlohmann::json::array()))
      out.conflict.emplace(p.at(0).get<int>(), p.at(1).get<int>());
    for (const auto& p : j.value("justifies", nlohmann::json::array()))
      out.justifies.emplace(p.at(0).get<int>(), p.at(1).get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("event structure json: ") + e.what());
  }
  return out;
}

}  // namespace detail

inline EventStructure parse_json(const std::string& text) {
  detail::RawParts p = detail::parts_from_json(text);
  Builder b;
  for (Event& e : p.events) b.add_event(std::move(e));
  for (const auto& [a, c] : p.po) b.order(a, c);
  for (const auto& [a, c] : p.conflict) b.conflict(a, c);
  for (const auto& [a, c] : p.justifies) b.justify(a, c);
  return b.build();
}

// The same form, but taken literally: no closure, so validate() can report
// exactly the laws a hand-written file breaks.
inline EventStructure parse_json_raw(const std::string& text) {
  detail::RawParts p = detail::parts_from_json(text);
  return EventStructure::from_raw(std::move(p.events), std::move(p.po),
                                  std::move(p.conflict),
                                  std::move(p.justifies));
}

inline std::string describe(const Event& e, int id) {
  std::string s = e.label.empty() ? "e" + std::to_string(id) : e.label;
  if (e.is_read) s += ": R " + e.loc + "=" + std::to_string(e.value);
  else if (e.is_write) s += ": W " + e.loc + "=" + std::to_string(e.value);
  return s;
}

inline std::string to_dot(const EventStructure& es) {
  std::ostringstream os;
  os << "digraph events {\n  rankdir=TB;\n  node [shape=box];\n";
  for (int i = 0; i < es.size(); ++i) {
    os << "  n" << i << " [label=\"" << describe(es.event(i), i) << "\"";
    if (es.event(i).is_final) os << ", peripheries=2";
    os << "];\n";
  }
  for (const auto& [a, b] : es.po_pairs()) {
    if (a == b || !es.lt(a, b)) continue;
    bool covering = true;
    for (int c = 0; c < es.size() && covering; ++c)
      if (es.lt(a, c) && es.lt(c, b)) covering = false;
    if (covering) os << "  n" << a << " -> n" << b << ";\n";
  }
  for (const auto& [a, b] : es.conflict_pairs())
    if (a < b)
      os << "  n" << a << " -> n" << b
         << " [style=dashed, dir=none, color=red, constraint=false];\n";
  os << "}\n";
  return os.str();
}

}  // namespace somm::es
