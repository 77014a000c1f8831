#pragma once

// Synthetic Autoware-like workloads: a callback-graph template plus a
// per-vertex execution-time sampler, scaled by a load factor lambda.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mdag/error.hpp"
#include "mdag/json_io.hpp"
#include "mdag/rational.hpp"
#include "mdag/taskmodel.hpp"
#include "mdag/time.hpp"

namespace mdag {

/// Draws uniformly from recorded measurements.
struct EmpiricalSampler {
  std::vector<Time> samples;
  friend bool operator==(const EmpiricalSampler&, const EmpiricalSampler&) = default;
};

/// Draws uniformly from the integer range [lo, hi].
struct UniformSampler {
  Time lo = 1;
  Time hi = 1;
  friend bool operator==(const UniformSampler&, const UniformSampler&) = default;
};

using VertexSampler = std::variant<EmpiricalSampler, UniformSampler>;
using SamplerSpec = std::map<VertexId, VertexSampler>;

struct WorkloadTemplate {
  CallbackGraph graph;
  SamplerSpec sampler;
  friend bool operator==(const WorkloadTemplate&, const WorkloadTemplate&) = default;
};

/// Load factor: fixed when lo == hi, otherwise drawn per generated workload.
struct LoadRange {
  Rational lo{1};
  Rational hi{1};
  friend bool operator==(const LoadRange&, const LoadRange&) = default;
};

struct GenConfig {
  std::uint64_t seed = 0;
  Rational beta{6, 5};
  LoadRange load{Rational(1, 10), Rational(1)};

  void validate() const {
    if (beta <= 0) throw Error(ErrorKind::InvalidConfig, "beta must be positive");
    if (load.lo <= 0 || load.hi > 1 || load.lo > load.hi) {
      throw Error(ErrorKind::InvalidConfig, "load range must satisfy 0 < lo <= hi <= 1");
    }
  }
};

struct Workload {
  TaskSet taskset;
  ExecAssignment exec;
  Rational load;  // lambda used for this draw
};

/// Uniform over [ceil(0.7 * wcet), wcet] for every vertex.
inline UniformSampler default_vertex_sampler(Time wcet) {
  Time lo = to_time(ceil(Rational(7, 10) * wcet));
  return {std::max<Time>(lo, 1), wcet};
}

inline SamplerSpec default_sampler(const TaskSet& taskset) {
  SamplerSpec spec;
  for (const auto& t : taskset.tasks) {
    for (const auto& v : t.vertices) spec[v.id] = default_vertex_sampler(v.wcet);
  }
  return spec;
}

inline SamplerSpec default_sampler(const CallbackGraph& graph) {
  SamplerSpec spec;
  for (const auto& c : graph.callbacks) spec[c.id] = default_vertex_sampler(c.wcet);
  return spec;
}

inline void validate_sampler(const TaskSet& taskset, const SamplerSpec& sampler) {
  for (const auto& t : taskset.tasks) {
    for (const auto& v : t.vertices) {
      auto it = sampler.find(v.id);
      if (it == sampler.end()) {
        throw Error(ErrorKind::SamplerMissingVertex, "no sampler for vertex " + std::to_string(v.id) +
                                                         " (" + v.name + ")");
      }
      const std::string who = "sampler for vertex " + std::to_string(v.id);
      if (const auto* e = std::get_if<EmpiricalSampler>(&it->second)) {
        if (e->samples.empty()) throw Error(ErrorKind::InvalidConfig, who + " has no samples");
        for (Time s : e->samples) {
          if (s <= 0) throw Error(ErrorKind::InvalidConfig, who + " has a non-positive sample");
          if (s > v.wcet) throw Error(ErrorKind::SampleExceedsWcet, who + " has sample " + std::to_string(s) +
                                                                        " above wcet " + std::to_string(v.wcet));
        }
      } else {
        const auto& u = std::get<UniformSampler>(it->second);
        if (u.lo <= 0 || u.lo > u.hi) throw Error(ErrorKind::InvalidConfig, who + " needs 0 < lo <= hi");
        if (u.hi > v.wcet) throw Error(ErrorKind::SampleExceedsWcet, who + " upper bound " + std::to_string(u.hi) +
                                                                         " exceeds wcet " + std::to_string(v.wcet));
      }
    }
  }
}

/// Resolution of a drawn load factor.
inline constexpr std::int64_t kLoadSteps = 1'000'000;

/// Draws lambda, then one sample per vertex in task-set order; each execution
/// time is round(lambda * sample), at least 1us. The generator is advanced in
/// the same order every time, so the draw is a function of the seed.
inline ExecAssignment sample_exec(const TaskSet& taskset, const SamplerSpec& sampler, const LoadRange& load,
                                  std::mt19937_64& rng, Rational* drawn_load = nullptr) {
  validate_sampler(taskset, sampler);
  Rational lambda = load.lo;
  if (load.hi != load.lo) {
    std::uniform_int_distribution<std::int64_t> step(0, kLoadSteps);
    lambda = load.lo + (load.hi - load.lo) * Rational(step(rng), kLoadSteps);
  }
  if (drawn_load) *drawn_load = lambda;

  ExecAssignment exec;
  for (const auto& t : taskset.tasks) {
    for (const auto& v : t.vertices) {
      const auto& spec = sampler.at(v.id);
      Time sample = 0;
      if (const auto* e = std::get_if<EmpiricalSampler>(&spec)) {
        std::uniform_int_distribution<std::size_t> pick(0, e->samples.size() - 1);
        sample = e->samples[pick(rng)];
      } else {
        const auto& u = std::get<UniformSampler>(spec);
        sample = std::uniform_int_distribution<Time>(u.lo, u.hi)(rng);
      }
      exec[v.id] = std::max<Time>(1, to_time(round_half_up(lambda * sample)));
    }
  }
  return exec;
}

/// Deadlines come from the WCET critical paths only; lambda and the samples
/// never influence them.
inline Workload generate(const WorkloadTemplate& tmpl, const GenConfig& config) {
  config.validate();
  Workload w;
  w.taskset = decompose(tmpl.graph, config.beta);
  std::mt19937_64 rng(config.seed);
  w.exec = sample_exec(w.taskset, tmpl.sampler, config.load, rng, &w.load);
  return w;
}

inline Rational realized_normalized_utilization(const TaskSet& taskset, const ExecAssignment& exec, int cores) {
  if (cores < 1) throw Error(ErrorKind::InvalidConfig, "core count must be at least 1");
  return total_utilization(taskset, exec) / cores;
}

namespace json_io {

inline Json to_json(const SamplerSpec& sampler) {
  Json out = Json::array();
  for (const auto& [id, spec] : sampler) {
    Json j;
    j["callback"] = id;
    if (const auto* e = std::get_if<EmpiricalSampler>(&spec)) {
      j["empirical_us"] = e->samples;
    } else {
      const auto& u = std::get<UniformSampler>(spec);
      j["uniform"] = Json{{"lo_us", u.lo}, {"hi_us", u.hi}};
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline SamplerSpec sampler_from_json(const Json& doc) {
  if (!doc.is_array()) throw Error(ErrorKind::Parse, "'sampler' must be an array");
  SamplerSpec out;
  for (const auto& j : doc) {
    check_keys(j, {"callback"}, {"empirical_us", "uniform"}, "sampler entry");
    VertexId id = get_int(j, "callback", "sampler entry");
    const std::string where = "sampler for callback " + std::to_string(id);
    if (j.contains("empirical_us") == j.contains("uniform")) {
      throw Error(ErrorKind::Parse, where + " needs exactly one of 'empirical_us' or 'uniform'");
    }
    VertexSampler spec;
    if (j.contains("empirical_us")) {
      spec = EmpiricalSampler{get<std::vector<Time>>(j, "empirical_us", where)};
    } else {
      const auto& u = j["uniform"];
      check_keys(u, {"lo_us", "hi_us"}, {}, where);
      spec = UniformSampler{get_int(u, "lo_us", where), get_int(u, "hi_us", where)};
    }
    if (!out.emplace(id, std::move(spec)).second) throw Error(ErrorKind::Parse, "duplicate " + where);
  }
  return out;
}

inline Json to_json(const WorkloadTemplate& tmpl) {
  Json j = to_json(tmpl.graph);
  j["sampler"] = to_json(tmpl.sampler);
  return j;
}

/// A graph document with an optional `sampler` block; without one the
/// default sampler is used.
inline WorkloadTemplate template_from_json(const Json& doc) {
  WorkloadTemplate t;
  t.graph = graph_from_json(doc, {"sampler"});
  t.sampler = doc.contains("sampler") ? sampler_from_json(doc["sampler"]) : default_sampler(t.graph);
  return t;
}

}  // namespace json_io

}  // namespace mdag
