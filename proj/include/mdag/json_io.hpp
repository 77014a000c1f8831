#pragma once

// JSON schemas for callback graphs and task sets. Unknown fields are rejected.
//
// graph:   {"callbacks": [{"id", "name", "kind", "period_us"?, "wcet_us"}],
//           "edges": [{"src", "dst", "kind"}]}
// taskset: {"tasks": [{"task_id", "period_us",
//                      "vertices": [{"id", "name", "wcet_us", "exec_us"?}],
//                      "edges": [[src, dst], ...],
//                      "deadlines": {"<sink id>": d_us}}]}

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "mdag/error.hpp"
#include "mdag/rational.hpp"
#include "mdag/taskmodel.hpp"

namespace mdag::json_io {

using Json = nlohmann::ordered_json;

inline void check_keys(const Json& obj, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Parse, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) throw Error(ErrorKind::Parse, "unknown field '" + key + "' in " + where);
  }
  for (auto k : required) {
    if (!obj.contains(std::string(k))) {
      throw Error(ErrorKind::Parse, "missing field '" + std::string(k) + "' in " + where);
    }
  }
}

template <class T>
T get(const Json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "field '" + key + "' in " + where + ": " + e.what());
  }
}

inline std::int64_t get_int(const Json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw Error(ErrorKind::Parse, "field '" + key + "' in " + where + " must be an integer");
  return v.get<std::int64_t>();
}

/// Rationals may be written as JSON numbers or as strings ("1.2", "6/5").
inline Rational get_rational(const Json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number_float()) return parse_rational(v.dump());
  throw Error(ErrorKind::Parse, where + " must be a number or a rational string");
}

inline std::string_view to_string(CallbackKind kind) {
  switch (kind) {
    case CallbackKind::Timer: return "timer";
    case CallbackKind::Subscription: return "subscription";
    case CallbackKind::Sync: return "sync";
  }
  return "?";
}

inline std::string_view to_string(EdgeKind kind) { return kind == EdgeKind::PubSub ? "pubsub" : "queue"; }

inline CallbackKind parse_callback_kind(const std::string& s) {
  if (s == "timer") return CallbackKind::Timer;
  if (s == "subscription") return CallbackKind::Subscription;
  if (s == "sync") return CallbackKind::Sync;
  throw Error(ErrorKind::Parse, "unknown callback kind '" + s + "'");
}

inline EdgeKind parse_edge_kind(const std::string& s) {
  if (s == "pubsub") return EdgeKind::PubSub;
  if (s == "queue") return EdgeKind::Queue;
  throw Error(ErrorKind::Parse, "unknown edge kind '" + s + "'");
}

inline Json to_json(const CallbackGraph& graph) {
  Json callbacks = Json::array();
  for (const auto& c : graph.callbacks) {
    Json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["kind"] = to_string(c.kind);
    if (c.period) j["period_us"] = *c.period;
    j["wcet_us"] = c.wcet;
    callbacks.push_back(std::move(j));
  }
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    edges.push_back(Json{{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  }
  return Json{{"callbacks", std::move(callbacks)}, {"edges", std::move(edges)}};
}

/// `extra_top_level` lists additional top-level keys tolerated by the caller
/// (the workload template adds a sampler block).
inline CallbackGraph graph_from_json(const Json& doc, std::initializer_list<std::string_view> extra_top_level = {}) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "graph document must be an object");
  for (const auto& [key, _] : doc.items()) {
    bool known = key == "callbacks" || key == "edges";
    for (auto k : extra_top_level) known = known || key == k;
    if (!known) throw Error(ErrorKind::Parse, "unknown field '" + key + "' in graph");
  }
  if (!doc.contains("callbacks") || !doc["callbacks"].is_array()) {
    throw Error(ErrorKind::Parse, "graph needs a 'callbacks' array");
  }
  CallbackGraph graph;
  for (const auto& j : doc["callbacks"]) {
    check_keys(j, {"id", "name", "kind", "wcet_us"}, {"period_us"}, "callback");
    Callback c;
    c.id = get_int(j, "id", "callback");
    const std::string where = "callback " + std::to_string(c.id);
    c.name = get<std::string>(j, "name", where);
    c.kind = parse_callback_kind(get<std::string>(j, "kind", where));
    if (j.contains("period_us")) c.period = get_int(j, "period_us", where);
    c.wcet = get_int(j, "wcet_us", where);
    graph.callbacks.push_back(std::move(c));
  }
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw Error(ErrorKind::Parse, "'edges' must be an array");
    for (const auto& j : doc["edges"]) {
      check_keys(j, {"src", "dst", "kind"}, {}, "edge");
      graph.edges.push_back({get_int(j, "src", "edge"), get_int(j, "dst", "edge"),
                             parse_edge_kind(get<std::string>(j, "kind", "edge"))});
    }
  }
  graph.validate();
  return graph;
}

inline Json to_json(const TaskSet& taskset, const ExecAssignment* exec = nullptr) {
  Json tasks = Json::array();
  for (const auto& t : taskset.tasks) {
    Json vertices = Json::array();
    for (const auto& v : t.vertices) {
      Json jv{{"id", v.id}, {"name", v.name}, {"wcet_us", v.wcet}};
      if (exec) jv["exec_us"] = exec->at(v.id);
      vertices.push_back(std::move(jv));
    }
    Json edges = Json::array();
    for (const auto& [s, d] : t.edges) edges.push_back(Json::array({s, d}));
    Json deadlines = Json::object();
    for (const auto& [sink, d] : t.deadlines) deadlines[std::to_string(sink)] = d;
    Json jt;
    jt["task_id"] = t.task_id;
    jt["period_us"] = t.period;
    jt["vertices"] = std::move(vertices);
    jt["edges"] = std::move(edges);
    jt["deadlines"] = std::move(deadlines);
    tasks.push_back(std::move(jt));
  }
  return Json{{"tasks", std::move(tasks)}};
}

struct TaskSetDocument {
  TaskSet taskset;
  std::optional<ExecAssignment> exec;  // set iff every vertex carries exec_us
};

inline TaskSetDocument taskset_document_from_json(const Json& doc) {
  check_keys(doc, {"tasks"}, {}, "taskset");
  if (!doc["tasks"].is_array()) throw Error(ErrorKind::Parse, "'tasks' must be an array");
  TaskSetDocument out;
  ExecAssignment exec;
  std::size_t with_exec = 0;
  std::size_t total = 0;
  for (const auto& jt : doc["tasks"]) {
    check_keys(jt, {"task_id", "period_us", "vertices", "edges", "deadlines"}, {}, "task");
    DagTask t;
    t.task_id = get_int(jt, "task_id", "task");
    const std::string where = "task " + std::to_string(t.task_id);
    t.period = get_int(jt, "period_us", where);
    if (!jt["vertices"].is_array()) throw Error(ErrorKind::Parse, where + ": 'vertices' must be an array");
    for (const auto& jv : jt["vertices"]) {
      check_keys(jv, {"id", "name", "wcet_us"}, {"exec_us"}, where + " vertex");
      Vertex v{get_int(jv, "id", where), get<std::string>(jv, "name", where), get_int(jv, "wcet_us", where)};
      ++total;
      if (jv.contains("exec_us")) {
        exec[v.id] = get_int(jv, "exec_us", where);
        ++with_exec;
      }
      t.vertices.push_back(std::move(v));
    }
    if (!jt["edges"].is_array()) throw Error(ErrorKind::Parse, where + ": 'edges' must be an array");
    for (const auto& je : jt["edges"]) {
      if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() || !je[1].is_number_integer()) {
        throw Error(ErrorKind::Parse, where + ": edges must be [src, dst] integer pairs");
      }
      t.edges.push_back({je[0].get<VertexId>(), je[1].get<VertexId>()});
    }
    if (!jt["deadlines"].is_object()) throw Error(ErrorKind::Parse, where + ": 'deadlines' must be an object");
    for (const auto& [key, value] : jt["deadlines"].items()) {
      VertexId sink = 0;
      try {
        std::size_t used = 0;
        sink = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, where + ": deadline key '" + key + "' is not a vertex id");
      }
      if (!value.is_number_integer()) throw Error(ErrorKind::Parse, where + ": deadlines must be integers");
      t.deadlines[sink] = value.get<Time>();
    }
    out.taskset.tasks.push_back(std::move(t));
  }
  if (with_exec != 0 && with_exec != total) {
    throw Error(ErrorKind::InvalidExecAssignment, "exec_us must be given for all vertices or none");
  }
  out.taskset.validate();
  if (with_exec != 0) {
    for (const auto& [id, e] : exec) {
      if (e <= 0) throw Error(ErrorKind::InvalidExecAssignment, "vertex " + std::to_string(id) + " has non-positive exec_us");
    }
    out.exec = std::move(exec);
  }
  return out;
}

inline TaskSet taskset_from_json(const Json& doc) { return taskset_document_from_json(doc).taskset; }

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace mdag::json_io
