#pragma once

// Deterministic discrete-event simulation of a task set on m identical cores.
//
// Event order at one instant: completions, then job releases, then dispatch.
// Every policy is a priority key over ready vertex instances (lower runs
// first) ending in the tie-breakers (task_id, k, vertex id).

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdag/error.hpp"
#include "mdag/rational.hpp"
#include "mdag/taskmodel.hpp"
#include "mdag/time.hpp"

namespace mdag {

using JobIndex = std::int64_t;

enum class PolicyId { GedfRad, WcFifo, Rm };
enum class Mode { NonPreemptive, Preemptive };

inline std::string_view to_string(PolicyId p) {
  switch (p) {
    case PolicyId::GedfRad: return "gedf_rad";
    case PolicyId::WcFifo: return "wc_fifo";
    case PolicyId::Rm: return "rm";
  }
  return "?";
}

inline PolicyId parse_policy(std::string_view s) {
  if (s == "gedf_rad") return PolicyId::GedfRad;
  if (s == "wc_fifo") return PolicyId::WcFifo;
  if (s == "rm") return PolicyId::Rm;
  throw Error(ErrorKind::InvalidConfig, "unknown policy '" + std::string(s) + "'");
}

inline std::string_view to_string(Mode m) {
  return m == Mode::NonPreemptive ? "non_preemptive" : "preemptive";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "non_preemptive") return Mode::NonPreemptive;
  if (s == "preemptive") return Mode::Preemptive;
  throw Error(ErrorKind::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

inline constexpr std::array<PolicyId, 3> kAllPolicies{PolicyId::GedfRad, PolicyId::WcFifo, PolicyId::Rm};

/// The k-th job of a task: released at k*T with one absolute deadline per sink.
struct JobInstance {
  TaskId task_id = 0;
  JobIndex k = 0;
  Time release = 0;
  std::map<VertexId, Time> deadlines;

  static JobInstance of(const DagTask& task, JobIndex k) {
    JobInstance job{task.task_id, k, k * task.period, {}};
    for (const auto& [sink, d] : task.deadlines) job.deadlines[sink] = d + k * task.period;
    return job;
  }
};

enum class VertexState { Waiting, Ready, Running, Done };

struct VertexInstance {
  TaskId task_id = 0;
  JobIndex k = 0;
  VertexId vertex = 0;
  Time exec = 0;
  VertexState state = VertexState::Waiting;
  std::optional<Time> ready_at;
  std::optional<Time> started_at;
  std::optional<Time> finished_at;
  Time remaining = 0;
};

/// Lexicographic priority; lower is more urgent. Unused trailing fields are 0.
struct PriorityKey {
  std::array<std::int64_t, 5> fields{};
  friend auto operator<=>(const PriorityKey&, const PriorityKey&) = default;
};

/// Reference absolute deadline: the vertex's own absolute deadline if it is a
/// sink, otherwise the earliest absolute deadline among its descendant sinks.
inline Time rad(const VertexInstance& inst, const RadBaseTable& table, Time period) {
  return table.at(inst.task_id, inst.vertex) + inst.k * period;
}

inline PriorityKey priority_key_gedf_rad(const VertexInstance& inst, const RadBaseTable& table, Time period) {
  return {{rad(inst, table, period), inst.task_id, inst.k, inst.vertex, 0}};
}

inline PriorityKey priority_key_wc_fifo(const VertexInstance& inst) {
  return {{inst.ready_at.value(), inst.task_id, inst.k, inst.vertex, 0}};
}

inline PriorityKey priority_key_rm(const VertexInstance& inst, Time period) {
  return {{period, inst.ready_at.value(), inst.task_id, inst.k, inst.vertex}};
}

/// Static data a policy may read when keying an instance.
struct PolicyContext {
  const RadBaseTable& rad_base;
  Time period;
};

struct GedfRadPolicy {
  static constexpr PolicyId id = PolicyId::GedfRad;
  static PriorityKey key(const VertexInstance& inst, const PolicyContext& ctx) {
    return priority_key_gedf_rad(inst, ctx.rad_base, ctx.period);
  }
};

struct WcFifoPolicy {
  static constexpr PolicyId id = PolicyId::WcFifo;
  static PriorityKey key(const VertexInstance& inst, const PolicyContext&) { return priority_key_wc_fifo(inst); }
};

struct RmPolicy {
  static constexpr PolicyId id = PolicyId::Rm;
  static PriorityKey key(const VertexInstance& inst, const PolicyContext& ctx) {
    return priority_key_rm(inst, ctx.period);
  }
};

template <class P>
concept SchedulePolicy = requires(const VertexInstance& inst, const PolicyContext& ctx) {
  { P::key(inst, ctx) } -> std::same_as<PriorityKey>;
  { P::id } -> std::convertible_to<PolicyId>;
};

/// Deadlines after `duration` are not classified at all.
inline bool detect_miss(std::optional<Time> finish, Time deadline, Time duration) {
  if (finish) return *finish > deadline;
  return deadline <= duration;
}

enum class TraceEventKind { Release, Start, Preempt, Finish, Miss };

inline std::string_view to_string(TraceEventKind e) {
  switch (e) {
    case TraceEventKind::Release: return "release";
    case TraceEventKind::Start: return "start";
    case TraceEventKind::Preempt: return "preempt";
    case TraceEventKind::Finish: return "finish";
    case TraceEventKind::Miss: return "miss";
  }
  return "?";
}

struct TraceEvent {
  Time t = 0;
  int core = -1;  // -1 for release and miss
  TaskId task = 0;
  JobIndex k = 0;
  VertexId vertex = 0;
  TraceEventKind event = TraceEventKind::Start;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct SinkRecord {
  TaskId task = 0;
  JobIndex k = 0;
  VertexId sink = 0;
  std::optional<Time> finish;
  Time deadline = 0;
  bool missed = false;

  friend bool operator==(const SinkRecord&, const SinkRecord&) = default;
};

struct SimConfig {
  int cores = 1;
  Time duration = 1;
  PolicyId policy = PolicyId::GedfRad;
  Mode mode = Mode::NonPreemptive;
  bool trace = false;
};

struct SimResult {
  std::vector<SinkRecord> sinks;  // ordered by (task order, k, sink id)
  std::size_t miss_count = 0;
  std::vector<TraceEvent> trace;
  std::vector<VertexInstance> instances;  // release order, vertices in task order
  Rational realized_utilization;
  std::vector<std::string> warnings;
};

namespace detail {

struct TaskTables {
  const DagTask* task = nullptr;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::size_t> pred_count;
  std::vector<Time> exec;
  std::size_t source = 0;
  JobIndex next_k = 0;
};

template <SchedulePolicy Policy>
class Engine {
 public:
  Engine(const TaskSet& taskset, const SimConfig& cfg, const ExecAssignment& exec)
      : taskset_(taskset), cfg_(cfg), rad_base_(rad_base_table(taskset)), cores_(cfg.cores) {
    for (const auto& task : taskset.tasks) {
      DagIndex dag(task);
      TaskTables tt;
      tt.task = &task;
      tt.succ.resize(dag.size());
      tt.pred_count.resize(dag.size());
      for (std::size_t i = 0; i < dag.size(); ++i) {
        tt.succ[i] = dag.successors(i);
        tt.pred_count[i] = dag.predecessors(i).size();
        tt.exec.push_back(exec.at(dag.id(i)));
      }
      tt.source = dag.sources().front();
      tables_.push_back(std::move(tt));
    }
  }

  SimResult run() {
    Time t = 0;
    for (;;) {
      complete_at(t);
      if (t < cfg_.duration) {
        release_at(t);
        dispatch(t);
      }
      Time next = next_event_time();
      if (next == kNever || next > cfg_.duration) break;
      t = next;
    }
    return finish_result();
  }

 private:
  static constexpr Time kNever = std::numeric_limits<Time>::max();

  struct Slot {
    VertexInstance inst;
    std::size_t task = 0;   // index into tables_
    std::size_t local = 0;  // vertex index within the task
    std::size_t job = 0;    // index into jobs_
    std::size_t pending = 0;
    PriorityKey key;
    Time resumed_at = 0;
  };

  struct Job {
    std::size_t task = 0;
    JobIndex k = 0;
    std::size_t first_slot = 0;
  };

  Time next_event_time() const {
    Time next = kNever;
    for (const auto& core : cores_) {
      if (core) {
        const auto& s = slots_[*core];
        next = std::min(next, s.resumed_at + s.inst.remaining);
      }
    }
    for (const auto& tt : tables_) {
      Time r = tt.next_k * tt.task->period;
      if (r < cfg_.duration) next = std::min(next, r);
    }
    return next;
  }

  void emit(Time t, int core, const Slot& s, TraceEventKind kind) {
    if (cfg_.trace) trace_.push_back({t, core, s.inst.task_id, s.inst.k, s.inst.vertex, kind});
  }

  void make_ready(std::size_t id, Time t) {
    auto& s = slots_[id];
    s.inst.state = VertexState::Ready;
    s.inst.ready_at = t;
    s.key = Policy::key(s.inst, PolicyContext{rad_base_, tables_[s.task].task->period});
    ready_.insert({s.key, id});
  }

  void complete_at(Time t) {
    for (std::size_t c = 0; c < cores_.size(); ++c) {
      if (!cores_[c]) continue;
      auto id = *cores_[c];
      auto& s = slots_[id];
      if (s.resumed_at + s.inst.remaining != t) continue;
      s.inst.remaining = 0;
      s.inst.state = VertexState::Done;
      s.inst.finished_at = t;
      cores_[c].reset();
      emit(t, static_cast<int>(c), s, TraceEventKind::Finish);
      const auto& job = jobs_[s.job];
      for (auto j : tables_[s.task].succ[s.local]) {
        auto sid = job.first_slot + j;
        if (--slots_[sid].pending == 0) make_ready(sid, t);
      }
    }
  }

  void release_at(Time t) {
    for (std::size_t ti = 0; ti < tables_.size(); ++ti) {
      auto& tt = tables_[ti];
      if (tt.next_k * tt.task->period != t) continue;
      Job job{ti, tt.next_k, slots_.size()};
      for (std::size_t i = 0; i < tt.exec.size(); ++i) {
        Slot s;
        s.inst.task_id = tt.task->task_id;
        s.inst.k = job.k;
        s.inst.vertex = tt.task->vertices[i].id;
        s.inst.exec = tt.exec[i];
        s.inst.remaining = tt.exec[i];
        s.task = ti;
        s.local = i;
        s.job = jobs_.size();
        s.pending = tt.pred_count[i];
        slots_.push_back(std::move(s));
      }
      jobs_.push_back(job);
      ++tt.next_k;
      const auto& src = slots_[job.first_slot + tt.source];
      emit(t, -1, src, TraceEventKind::Release);
      make_ready(job.first_slot + tt.source, t);
    }
  }

  void start(std::size_t id, std::size_t core, Time t) {
    auto& s = slots_[id];
    s.inst.state = VertexState::Running;
    if (!s.inst.started_at) s.inst.started_at = t;
    s.resumed_at = t;
    cores_[core] = id;
    emit(t, static_cast<int>(core), s, TraceEventKind::Start);
  }

  void dispatch(Time t) {
    if (cfg_.mode == Mode::Preemptive) preempt_lower(t);
    for (std::size_t c = 0; c < cores_.size() && !ready_.empty(); ++c) {
      if (cores_[c]) continue;
      auto id = ready_.begin()->second;
      ready_.erase(ready_.begin());
      start(id, c, t);
    }
  }

  // Keeps the m most urgent of (running + ready) on the cores: running
  // instances outside that set are returned to the ready queue.
  void preempt_lower(Time t) {
    std::vector<std::pair<PriorityKey, std::size_t>> pool(ready_.begin(), ready_.end());
    for (const auto& core : cores_) {
      if (core) pool.push_back({slots_[*core].key, *core});
    }
    if (pool.size() <= cores_.size()) return;
    std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cores_.size() - 1), pool.end());
    const PriorityKey cutoff = pool[cores_.size() - 1].first;
    for (std::size_t c = 0; c < cores_.size(); ++c) {
      if (!cores_[c]) continue;
      auto id = *cores_[c];
      auto& s = slots_[id];
      if (s.key <= cutoff) continue;
      s.inst.remaining -= t - s.resumed_at;
      s.inst.state = VertexState::Ready;
      cores_[c].reset();
      ready_.insert({s.key, id});
      emit(t, static_cast<int>(c), s, TraceEventKind::Preempt);
    }
  }

  SimResult finish_result() {
    SimResult result;
    std::vector<TraceEvent> misses;
    for (const auto& job : jobs_) {
      const auto& tt = tables_[job.task];
      const DagTask& task = *tt.task;
      for (const auto& [sink, rel] : task.deadlines) {
        Time d = rel + job.k * task.period;
        if (d > cfg_.duration) continue;
        std::size_t local = 0;
        while (task.vertices[local].id != sink) ++local;
        const auto& inst = slots_[job.first_slot + local].inst;
        SinkRecord rec{task.task_id, job.k, sink, inst.finished_at, d, detect_miss(inst.finished_at, d, cfg_.duration)};
        if (rec.missed) {
          ++result.miss_count;
          misses.push_back({d, -1, task.task_id, job.k, sink, TraceEventKind::Miss});
        }
        result.sinks.push_back(rec);
      }
    }
    std::sort(result.sinks.begin(), result.sinks.end(), [this](const SinkRecord& a, const SinkRecord& b) {
      auto ta = task_order(a.task);
      auto tb = task_order(b.task);
      return std::tie(ta, a.k, a.sink) < std::tie(tb, b.k, b.sink);
    });

    if (cfg_.trace) {
      // A miss at instant d follows the finishes at d and precedes everything else at d.
      std::stable_sort(misses.begin(), misses.end(),
                       [](const TraceEvent& a, const TraceEvent& b) { return a.t < b.t; });
      auto rank = [](const TraceEvent& e) { return e.event == TraceEventKind::Finish ? 0 : 2; };
      std::vector<TraceEvent> merged;
      merged.reserve(trace_.size() + misses.size());
      std::size_t mi = 0;
      for (const auto& e : trace_) {
        while (mi < misses.size() &&
               (misses[mi].t < e.t || (misses[mi].t == e.t && rank(e) > 1))) {
          merged.push_back(misses[mi++]);
        }
        merged.push_back(e);
      }
      while (mi < misses.size()) merged.push_back(misses[mi++]);
      result.trace = std::move(merged);
    }

    result.instances.reserve(slots_.size());
    for (const auto& s : slots_) result.instances.push_back(s.inst);

    ExecAssignment exec;
    for (const auto& tt : tables_) {
      for (std::size_t i = 0; i < tt.exec.size(); ++i) exec[tt.task->vertices[i].id] = tt.exec[i];
    }
    result.realized_utilization = total_utilization(taskset_, exec);

    Time h = hyper_period(taskset_);
    if (cfg_.duration % h != 0) {
      result.warnings.push_back("DurationNotHyperPeriodMultiple: duration " + std::to_string(cfg_.duration) +
                                "us is not a multiple of the hyper-period " + std::to_string(h) + "us");
    }
    return result;
  }

  std::size_t task_order(TaskId id) const {
    for (std::size_t i = 0; i < tables_.size(); ++i) {
      if (tables_[i].task->task_id == id) return i;
    }
    return tables_.size();
  }

  const TaskSet& taskset_;
  SimConfig cfg_;
  RadBaseTable rad_base_;
  std::vector<TaskTables> tables_;
  std::vector<Slot> slots_;
  std::vector<Job> jobs_;
  std::set<std::pair<PriorityKey, std::size_t>> ready_;
  std::vector<std::optional<std::size_t>> cores_;
  std::vector<TraceEvent> trace_;
};

}  // namespace detail

inline void validate_exec_assignment(const TaskSet& taskset, const ExecAssignment& exec) {
  for (const auto& t : taskset.tasks) {
    for (const auto& v : t.vertices) {
      auto it = exec.find(v.id);
      if (it == exec.end()) {
        throw Error(ErrorKind::InvalidExecAssignment, "no execution time for vertex " + std::to_string(v.id));
      }
      if (it->second <= 0) {
        throw Error(ErrorKind::InvalidExecAssignment, "non-positive execution time for vertex " +
                                                          std::to_string(v.id));
      }
    }
  }
}

template <SchedulePolicy Policy>
SimResult run_with(const TaskSet& taskset, const SimConfig& cfg, const ExecAssignment& exec) {
  if (cfg.cores < 1) throw Error(ErrorKind::InvalidConfig, "core count must be at least 1");
  if (cfg.duration < 1) throw Error(ErrorKind::InvalidConfig, "duration must be at least 1us");
  taskset.validate();
  validate_exec_assignment(taskset, exec);
  return detail::Engine<Policy>(taskset, cfg, exec).run();
}

/// Simulates [0, duration). Jobs are released synchronously at k*T; sinks
/// whose absolute deadline is at most `duration` are classified hit or miss.
inline SimResult run(const TaskSet& taskset, const SimConfig& cfg, const ExecAssignment& exec) {
  switch (cfg.policy) {
    case PolicyId::GedfRad: return run_with<GedfRadPolicy>(taskset, cfg, exec);
    case PolicyId::WcFifo: return run_with<WcFifoPolicy>(taskset, cfg, exec);
    case PolicyId::Rm: return run_with<RmPolicy>(taskset, cfg, exec);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown policy");
}

}  // namespace mdag
