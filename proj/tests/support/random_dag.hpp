#pragma once

// Layer-free random single-source DAGs for property tests and oracles.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "mdag/taskmodel.hpp"

namespace mdag::testing {

struct RandomDagSpec {
  int min_vertices = 1;
  int max_vertices = 10;
  Time min_wcet = 1;
  Time max_wcet = 20;
  double extra_edge_probability = 0.25;
  bool chain = false;  // force a single path
};

/// Vertex i > 0 gets at least one predecessor among [0, i), so vertex 0 is the
/// unique source and every vertex is reachable. Ids are shuffled and offset so
/// that ids never coincide with indices.
inline DagTask random_dag(std::mt19937_64& rng, TaskId task_id, VertexId id_base, const RandomDagSpec& spec) {
  std::uniform_int_distribution<int> nd(spec.min_vertices, spec.max_vertices);
  const int n = nd(rng);
  std::vector<VertexId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), id_base);
  std::shuffle(ids.begin() + 1, ids.end(), rng);

  DagTask t;
  t.task_id = task_id;
  std::uniform_int_distribution<Time> wd(spec.min_wcet, spec.max_wcet);
  for (int i = 0; i < n; ++i) t.vertices.push_back({ids[i], "v" + std::to_string(ids[i]), wd(rng)});

  std::bernoulli_distribution extra(spec.extra_edge_probability);
  for (int i = 1; i < n; ++i) {
    if (spec.chain) {
      t.edges.push_back({ids[i - 1], ids[i]});
      continue;
    }
    std::uniform_int_distribution<int> pd(0, i - 1);
    int first = pd(rng);
    t.edges.push_back({ids[first], ids[i]});
    for (int j = 0; j < i; ++j) {
      if (j != first && extra(rng)) t.edges.push_back({ids[j], ids[i]});
    }
  }
  std::shuffle(t.edges.begin(), t.edges.end(), rng);
  return t;
}

/// Fills deadlines with arbitrary positive values in [lo, hi].
inline void random_deadlines(std::mt19937_64& rng, DagTask& t, Time lo, Time hi) {
  DagIndex dag(t);
  std::uniform_int_distribution<Time> dd(lo, hi);
  t.deadlines.clear();
  for (auto s : dag.sinks()) t.deadlines[dag.id(s)] = dd(rng);
}

struct RandomTaskSetSpec {
  int max_tasks = 3;
  RandomDagSpec dag{1, 6, 1, 20, 0.25, false};
  Time min_period = 10;
  Time max_period = 100;
  std::vector<Rational> betas{Rational(1), Rational(6, 5), Rational(3, 2), Rational(2)};
};

struct RandomInstance {
  TaskSet taskset;
  ExecAssignment exec;  // uniform in [1, wcet]
};

inline RandomInstance random_instance(std::mt19937_64& rng, const RandomTaskSetSpec& spec) {
  RandomInstance out;
  std::uniform_int_distribution<int> nt(1, spec.max_tasks);
  std::uniform_int_distribution<Time> pd(spec.min_period, spec.max_period);
  std::uniform_int_distribution<std::size_t> bd(0, spec.betas.size() - 1);
  const int n = nt(rng);
  // Non-contiguous task ids exercise the task_id tie-breaker.
  std::vector<TaskId> ids{2, 5, 7, 11, 13};
  std::shuffle(ids.begin(), ids.end(), rng);
  for (int i = 0; i < n; ++i) {
    auto t = random_dag(rng, ids[static_cast<std::size_t>(i)], 1 + 100 * i, spec.dag);
    t.period = pd(rng);
    t.deadlines = assign_deadlines(t, spec.betas[bd(rng)]);
    for (const auto& v : t.vertices) out.exec[v.id] = std::uniform_int_distribution<Time>(1, v.wcet)(rng);
    out.taskset.tasks.push_back(std::move(t));
  }
  return out;
}

}  // namespace mdag::testing
