#pragma once

// JSON renderings of simulation results and JSON-lines traces.

#include <filesystem>
#include <string>

#include "mdag/json_io.hpp"
#include "mdag/simulator.hpp"

namespace mdag::json_io {

/// {"t_us", "core", "task", "k", "vertex", "event"}; core is null for release and miss.
inline Json to_json(const TraceEvent& e) {
  Json j;
  j["t_us"] = e.t;
  j["core"] = e.core < 0 ? Json(nullptr) : Json(e.core);
  j["task"] = e.task;
  j["k"] = e.k;
  j["vertex"] = e.vertex;
  j["event"] = to_string(e.event);
  return j;
}

inline std::string trace_jsonl(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

inline Json to_json(const SimResult& r, const SimConfig& cfg) {
  Json sinks = Json::array();
  for (const auto& s : r.sinks) {
    Json j;
    j["task"] = s.task;
    j["k"] = s.k;
    j["sink"] = s.sink;
    j["finish_us"] = s.finish ? Json(*s.finish) : Json(nullptr);
    j["deadline_us"] = s.deadline;
    j["missed"] = s.missed;
    sinks.push_back(std::move(j));
  }
  Json j;
  j["policy"] = to_string(cfg.policy);
  j["mode"] = to_string(cfg.mode);
  j["cores"] = cfg.cores;
  j["duration_us"] = cfg.duration;
  j["miss_count"] = r.miss_count;
  j["realized_utilization"] = to_fixed(r.realized_utilization, 6);
  j["realized_norm_util"] = to_fixed(r.realized_utilization / cfg.cores, 6);
  j["warnings"] = r.warnings;
  j["sinks"] = std::move(sinks);
  return j;
}

}  // namespace mdag::json_io
