#pragma once

// Multi-deadline DAG task model: callback graphs, their decomposition into
// sub-DAG tasks, and the static tables the schedulers need.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdag/error.hpp"
#include "mdag/rational.hpp"
#include "mdag/time.hpp"

namespace mdag {

enum class CallbackKind { Timer, Subscription, Sync };
enum class EdgeKind { PubSub, Queue };

struct Callback {
  VertexId id = 0;
  std::string name;
  CallbackKind kind = CallbackKind::Subscription;
  std::optional<Time> period;  // present iff kind == Timer
  Time wcet = 0;

  friend bool operator==(const Callback&, const Callback&) = default;
};

struct CallbackEdge {
  VertexId src = 0;
  VertexId dst = 0;
  EdgeKind kind = EdgeKind::PubSub;

  friend bool operator==(const CallbackEdge&, const CallbackEdge&) = default;
};

/// Raw system description. Pub-sub edges trigger the consumer; queue edges
/// (member-variable queues, take API) do not, and may close cycles.
struct CallbackGraph {
  std::vector<Callback> callbacks;
  std::vector<CallbackEdge> edges;

  const Callback* find(VertexId id) const {
    auto it = std::find_if(callbacks.begin(), callbacks.end(),
                           [id](const Callback& c) { return c.id == id; });
    return it == callbacks.end() ? nullptr : &*it;
  }

  void validate() const;

  friend bool operator==(const CallbackGraph&, const CallbackGraph&) = default;
};

struct Vertex {
  VertexId id = 0;
  std::string name;
  Time wcet = 0;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

using Edge = std::pair<VertexId, VertexId>;

/// One recurrent DAG task: period, precedence graph, and one relative
/// deadline per sink vertex.
struct DagTask {
  TaskId task_id = 0;
  Time period = 0;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::map<VertexId, Time> deadlines;

  const Vertex& vertex(VertexId id) const {
    for (const auto& v : vertices) {
      if (v.id == id) return v;
    }
    throw Error(ErrorKind::UnknownVertex, "vertex " + std::to_string(id) + " not in task " +
                                              std::to_string(task_id));
  }

  bool contains(VertexId id) const {
    return std::any_of(vertices.begin(), vertices.end(), [id](const Vertex& v) { return v.id == id; });
  }

  /// Checks everything except the deadline map.
  void validate_structure() const;
  void validate() const;

  friend bool operator==(const DagTask&, const DagTask&) = default;
};

struct TaskSet {
  std::vector<DagTask> tasks;

  const DagTask& task(TaskId id) const {
    for (const auto& t : tasks) {
      if (t.task_id == id) return t;
    }
    throw Error(ErrorKind::InvalidTaskSet, "no task " + std::to_string(id));
  }

  std::size_t vertex_count() const {
    std::size_t n = 0;
    for (const auto& t : tasks) n += t.vertices.size();
    return n;
  }

  void validate() const;

  friend bool operator==(const TaskSet&, const TaskSet&) = default;
};

/// Fixed execution time per vertex for one simulation run. Vertex ids are
/// unique across a task set, so the vertex id alone is the key.
using ExecAssignment = std::map<VertexId, Time>;

/// Per task, per vertex: the smallest relative deadline among the sinks
/// reachable from (or equal to) the vertex.
struct RadBaseTable {
  std::map<TaskId, std::map<VertexId, Time>> entries;

  Time at(TaskId task, VertexId vertex) const {
    auto t = entries.find(task);
    if (t != entries.end()) {
      auto v = t->second.find(vertex);
      if (v != t->second.end()) return v->second;
    }
    throw Error(ErrorKind::UnknownVertex, "no RAD base for task " + std::to_string(task) +
                                              " vertex " + std::to_string(vertex));
  }

  friend bool operator==(const RadBaseTable&, const RadBaseTable&) = default;
};

/// Dense adjacency view of a task's DAG. Indices follow `task.vertices`.
class DagIndex {
 public:
  explicit DagIndex(const DagTask& task) : task_(&task) {
    const auto n = task.vertices.size();
    succ_.resize(n);
    pred_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_.emplace(task.vertices[i].id, i).second) {
        throw Error(ErrorKind::InvalidTask, "duplicate vertex id " + std::to_string(task.vertices[i].id) +
                                                " in task " + std::to_string(task.task_id));
      }
    }
    std::set<Edge> seen;
    for (const auto& [src, dst] : task.edges) {
      auto s = index_.find(src);
      auto d = index_.find(dst);
      if (s == index_.end() || d == index_.end()) {
        throw Error(ErrorKind::InvalidTask, "edge " + std::to_string(src) + "->" + std::to_string(dst) +
                                                " references an unknown vertex in task " +
                                                std::to_string(task.task_id));
      }
      if (!seen.insert({src, dst}).second) {
        throw Error(ErrorKind::InvalidTask, "duplicate edge " + std::to_string(src) + "->" +
                                                std::to_string(dst));
      }
      succ_[s->second].push_back(d->second);
      pred_[d->second].push_back(s->second);
    }

    // Kahn, smallest index first so the order is reproducible.
    std::vector<std::size_t> indeg(n);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = pred_[i].size();
    std::set<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
      if (indeg[i] == 0) frontier.insert(i);
    }
    while (!frontier.empty()) {
      auto i = *frontier.begin();
      frontier.erase(frontier.begin());
      topo_.push_back(i);
      for (auto j : succ_[i]) {
        if (--indeg[j] == 0) frontier.insert(j);
      }
    }
    acyclic_ = topo_.size() == n;
  }

  std::size_t size() const { return succ_.size(); }
  bool acyclic() const { return acyclic_; }
  const std::vector<std::size_t>& topo_order() const { return topo_; }
  const std::vector<std::size_t>& successors(std::size_t i) const { return succ_[i]; }
  const std::vector<std::size_t>& predecessors(std::size_t i) const { return pred_[i]; }
  bool is_sink(std::size_t i) const { return succ_[i].empty(); }
  VertexId id(std::size_t i) const { return task_->vertices[i].id; }
  Time wcet(std::size_t i) const { return task_->vertices[i].wcet; }

  std::optional<std::size_t> find(VertexId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(VertexId id) const {
    if (auto i = find(id)) return *i;
    throw Error(ErrorKind::UnknownVertex, "vertex " + std::to_string(id) + " not in task " +
                                              std::to_string(task_->task_id));
  }

  std::vector<std::size_t> sources() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (pred_[i].empty()) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> sinks() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (succ_[i].empty()) out.push_back(i);
    }
    return out;
  }

 private:
  const DagTask* task_;
  std::map<VertexId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> pred_;
  std::vector<std::size_t> topo_;
  bool acyclic_ = false;
};

inline void CallbackGraph::validate() const {
  std::set<VertexId> ids;
  for (const auto& c : callbacks) {
    const std::string who = "callback " + std::to_string(c.id) + " (" + c.name + ")";
    if (!ids.insert(c.id).second) throw Error(ErrorKind::InvalidGraph, "duplicate " + who);
    if (c.wcet <= 0) throw Error(ErrorKind::InvalidGraph, who + " has non-positive wcet");
    if (c.kind == CallbackKind::Timer) {
      if (!c.period) throw Error(ErrorKind::InvalidGraph, "timer " + who + " has no period");
      if (*c.period <= 0) throw Error(ErrorKind::InvalidGraph, who + " has non-positive period");
    } else if (c.period) {
      throw Error(ErrorKind::InvalidGraph, "non-timer " + who + " has a period");
    }
  }
  std::set<std::pair<Edge, EdgeKind>> seen;
  for (const auto& e : edges) {
    if (!ids.contains(e.src) || !ids.contains(e.dst)) {
      throw Error(ErrorKind::InvalidGraph, "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                                               " references an unknown callback");
    }
    if (!seen.insert({{e.src, e.dst}, e.kind}).second) {
      throw Error(ErrorKind::InvalidGraph, "duplicate edge " + std::to_string(e.src) + "->" +
                                               std::to_string(e.dst));
    }
  }
}

inline void DagTask::validate_structure() const {
  const std::string who = "task " + std::to_string(task_id);
  if (period <= 0) throw Error(ErrorKind::InvalidTask, who + " has non-positive period");
  if (vertices.empty()) throw Error(ErrorKind::InvalidTask, who + " has no vertices");
  for (const auto& v : vertices) {
    if (v.wcet <= 0) {
      throw Error(ErrorKind::InvalidTask, who + " vertex " + std::to_string(v.id) + " has non-positive wcet");
    }
  }
  DagIndex dag(*this);
  if (!dag.acyclic()) throw Error(ErrorKind::InvalidTask, who + " is cyclic");
  auto sources = dag.sources();
  if (sources.size() != 1) {
    throw Error(ErrorKind::InvalidTask, who + " has " + std::to_string(sources.size()) + " sources");
  }
  std::vector<bool> reached(dag.size(), false);
  reached[sources.front()] = true;
  for (auto i : dag.topo_order()) {
    if (!reached[i]) continue;
    for (auto j : dag.successors(i)) reached[j] = true;
  }
  for (std::size_t i = 0; i < dag.size(); ++i) {
    if (!reached[i]) {
      throw Error(ErrorKind::InvalidTask, who + " vertex " + std::to_string(dag.id(i)) +
                                              " is unreachable from the source");
    }
  }
}

inline void DagTask::validate() const {
  validate_structure();
  const std::string who = "task " + std::to_string(task_id);
  DagIndex dag(*this);
  auto sinks = dag.sinks();
  if (deadlines.size() != sinks.size()) {
    throw Error(ErrorKind::InvalidTask, who + " needs exactly one deadline per sink");
  }
  for (auto s : sinks) {
    auto it = deadlines.find(dag.id(s));
    if (it == deadlines.end()) {
      throw Error(ErrorKind::InvalidTask, who + " sink " + std::to_string(dag.id(s)) + " has no deadline");
    }
    if (it->second <= 0) {
      throw Error(ErrorKind::InvalidTask, who + " sink " + std::to_string(dag.id(s)) +
                                              " has non-positive deadline");
    }
  }
}

inline void TaskSet::validate() const {
  if (tasks.empty()) throw Error(ErrorKind::InvalidTaskSet, "task set is empty");
  std::set<TaskId> task_ids;
  std::set<VertexId> vertex_ids;
  for (const auto& t : tasks) {
    if (!task_ids.insert(t.task_id).second) {
      throw Error(ErrorKind::InvalidTaskSet, "duplicate task id " + std::to_string(t.task_id));
    }
    t.validate();
    for (const auto& v : t.vertices) {
      if (!vertex_ids.insert(v.id).second) {
        throw Error(ErrorKind::InvalidTaskSet, "vertex id " + std::to_string(v.id) +
                                                   " appears in more than one task");
      }
    }
  }
}

/// Longest source-to-sink path, summing vertex WCETs with both endpoints included.
inline Time critical_path_length(const DagTask& task, VertexId sink) {
  DagIndex dag(task);
  auto target = dag.index_of(sink);
  if (!dag.is_sink(target)) {
    throw Error(ErrorKind::NotASink, "vertex " + std::to_string(sink) + " is not a sink of task " +
                                         std::to_string(task.task_id));
  }
  if (!dag.acyclic()) throw Error(ErrorKind::InvalidTask, "task " + std::to_string(task.task_id) + " is cyclic");
  std::vector<Time> finish(dag.size(), 0);
  for (auto i : dag.topo_order()) {
    Time start = 0;
    for (auto p : dag.predecessors(i)) start = std::max(start, finish[p]);
    finish[i] = start + dag.wcet(i);
  }
  return finish[target];
}

/// D(sink) = ceil(beta * critical path length to that sink).
inline std::map<VertexId, Time> assign_deadlines(const DagTask& task, const Rational& beta) {
  if (beta <= 0) throw Error(ErrorKind::InvalidConfig, "beta must be positive");
  task.validate_structure();
  DagIndex dag(task);
  std::map<VertexId, Time> out;
  for (auto s : dag.sinks()) {
    out[dag.id(s)] = to_time(ceil(beta * critical_path_length(task, dag.id(s))));
  }
  return out;
}

/// Sinks reachable through at least one edge; the vertex itself is excluded.
inline std::set<VertexId> descendant_sinks(const DagTask& task, VertexId vertex) {
  DagIndex dag(task);
  auto start = dag.index_of(vertex);
  std::set<VertexId> out;
  std::vector<bool> seen(dag.size(), false);
  std::vector<std::size_t> stack(dag.successors(start).begin(), dag.successors(start).end());
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    if (seen[i]) continue;
    seen[i] = true;
    if (dag.is_sink(i)) out.insert(dag.id(i));
    for (auto j : dag.successors(i)) stack.push_back(j);
  }
  return out;
}

/// The runtime RAD of vertex v in job k is entry(v) + k*T.
inline RadBaseTable rad_base_table(const TaskSet& taskset) {
  RadBaseTable table;
  for (const auto& task : taskset.tasks) {
    DagIndex dag(task);
    std::vector<Time> base(dag.size(), std::numeric_limits<Time>::max());
    const auto& order = dag.topo_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto i = *it;
      if (dag.is_sink(i)) {
        base[i] = task.deadlines.at(dag.id(i));
      } else {
        for (auto j : dag.successors(i)) base[i] = std::min(base[i], base[j]);
      }
    }
    auto& entries = table.entries[task.task_id];
    for (std::size_t i = 0; i < dag.size(); ++i) entries[dag.id(i)] = base[i];
  }
  return table;
}

/// Least common multiple of all periods.
inline Time hyper_period(const TaskSet& taskset) {
  Time h = 1;
  for (const auto& t : taskset.tasks) {
    if (t.period <= 0) throw Error(ErrorKind::InvalidTask, "non-positive period");
    Time g = std::gcd(h, t.period);
    Time factor = t.period / g;
    if (h > std::numeric_limits<Time>::max() / factor) {
      throw Error(ErrorKind::Overflow, "hyper-period exceeds the time range");
    }
    h *= factor;
  }
  return h;
}

/// Sum over tasks of (total execution time / period), exact.
inline Rational total_utilization(const TaskSet& taskset, const ExecAssignment& exec) {
  Rational u = 0;
  for (const auto& t : taskset.tasks) {
    BigInt sum = 0;
    for (const auto& v : t.vertices) {
      auto it = exec.find(v.id);
      if (it == exec.end() || it->second <= 0) {
        throw Error(ErrorKind::InvalidExecAssignment, "vertex " + std::to_string(v.id) +
                                                          " has no positive execution time");
      }
      sum += it->second;
    }
    u += Rational(sum, BigInt(t.period));
  }
  return u;
}

inline ExecAssignment wcet_assignment(const TaskSet& taskset) {
  ExecAssignment exec;
  for (const auto& t : taskset.tasks) {
    for (const auto& v : t.vertices) exec[v.id] = v.wcet;
  }
  return exec;
}

inline Rational total_utilization(const TaskSet& taskset) {
  return total_utilization(taskset, wcet_assignment(taskset));
}

namespace detail {

inline std::string describe_members(const CallbackGraph& graph, const std::vector<VertexId>& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    const Callback* c = graph.find(ids[i]);
    out += std::to_string(ids[i]) + ":" + (c ? c->name : "?");
  }
  return out + "}";
}

}  // namespace detail

/// Cuts the graph at every queue edge. Each weakly connected pub-sub component
/// becomes one task whose single timer callback is the source and supplies the
/// period. Tasks are numbered from 1 in order of their smallest callback id;
/// vertex ids are the callback ids.
inline TaskSet decompose(const CallbackGraph& graph, const Rational& beta) {
  if (beta <= 0) throw Error(ErrorKind::InvalidConfig, "beta must be positive");
  graph.validate();

  std::map<VertexId, std::size_t> index;
  for (std::size_t i = 0; i < graph.callbacks.size(); ++i) index[graph.callbacks[i].id] = i;
  const auto n = graph.callbacks.size();

  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& e : graph.edges) {
    if (e.kind != EdgeKind::PubSub) continue;
    auto s = index.at(e.src);
    auto d = index.at(e.dst);
    succ[s].push_back(d);
    ++indeg[d];
    parent[root(s)] = root(d);
  }

  {
    std::vector<std::size_t> deg = indeg;
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
      if (deg[i] == 0) frontier.push_back(i);
    }
    std::size_t visited = 0;
    while (!frontier.empty()) {
      auto i = frontier.back();
      frontier.pop_back();
      ++visited;
      for (auto j : succ[i]) {
        if (--deg[j] == 0) frontier.push_back(j);
      }
    }
    if (visited != n) {
      std::vector<VertexId> cyclic;
      for (std::size_t i = 0; i < n; ++i) {
        if (deg[i] != 0) cyclic.push_back(graph.callbacks[i].id);
      }
      std::sort(cyclic.begin(), cyclic.end());
      throw Error(ErrorKind::CycleAfterSplit,
                  "pub-sub edges form a cycle through " + detail::describe_members(graph, cyclic));
    }
  }

  // Components keyed by their smallest callback id.
  std::map<std::size_t, std::vector<VertexId>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[root(i)].push_back(graph.callbacks[i].id);
  std::vector<std::vector<VertexId>> components;
  for (auto& [r, ids] : by_root) {
    std::sort(ids.begin(), ids.end());
    components.push_back(std::move(ids));
  }
  std::sort(components.begin(), components.end());

  TaskSet out;
  TaskId next_id = 1;
  for (const auto& ids : components) {
    const std::string members = detail::describe_members(graph, ids);
    std::vector<VertexId> sources;
    std::vector<VertexId> timers;
    for (auto id : ids) {
      if (indeg[index.at(id)] == 0) sources.push_back(id);
      if (graph.find(id)->kind == CallbackKind::Timer) timers.push_back(id);
    }
    if (timers.empty()) {
      throw Error(ErrorKind::ComponentWithoutTimerSource, "component " + members + " has no timer callback");
    }
    if (sources.size() > 1) {
      throw Error(ErrorKind::MultipleSources, "component " + members + " has sources " +
                                                  detail::describe_members(graph, sources));
    }
    if (graph.find(sources.front())->kind != CallbackKind::Timer) {
      throw Error(ErrorKind::ComponentWithoutTimerSource,
                  "component " + members + " starts at non-timer callback " +
                      detail::describe_members(graph, sources));
    }
    if (timers.size() > 1) {
      throw Error(ErrorKind::MultipleSources, "component " + members + " has several timers " +
                                                  detail::describe_members(graph, timers));
    }

    DagTask task;
    task.task_id = next_id++;
    task.period = *graph.find(sources.front())->period;
    for (auto id : ids) {
      const Callback* c = graph.find(id);
      task.vertices.push_back({c->id, c->name, c->wcet});
    }
    for (const auto& e : graph.edges) {
      if (e.kind == EdgeKind::PubSub && std::binary_search(ids.begin(), ids.end(), e.src)) {
        task.edges.push_back({e.src, e.dst});
      }
    }
    task.deadlines = assign_deadlines(task, beta);
    out.tasks.push_back(std::move(task));
  }
  out.validate();
  return out;
}

}  // namespace mdag
