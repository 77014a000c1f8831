#include <gtest/gtest.h>

#include <random>

#include "mdag/default_template.hpp"
#include "mdag/report.hpp"
#include "mdag/simulator.hpp"
#include "mdag/workload.hpp"
#include "support/oracle_compare.hpp"
#include "support/random_dag.hpp"
#include "support/schedule_checks.hpp"

using namespace mdag;
namespace mt = mdag::testing;

namespace {

DagTask single(TaskId id, VertexId v, Time wcet, Time period, Time deadline) {
  return DagTask{id, period, {{v, "v" + std::to_string(v), wcet}}, {}, {{v, deadline}}};
}

SimResult simulate(const TaskSet& ts, int cores, Time duration, PolicyId p, Mode mode = Mode::NonPreemptive) {
  return run(ts, SimConfig{cores, duration, p, mode, true}, wcet_assignment(ts));
}

const VertexInstance& instance(const SimResult& r, TaskId task, JobIndex k, VertexId v) {
  for (const auto& i : r.instances) {
    if (i.task_id == task && i.k == k && i.vertex == v) return i;
  }
  throw std::runtime_error("no such instance");
}

}  // namespace

TEST(Rad, Examples) {
  RadBaseTable table;
  table.entries[1] = {{10, 10}, {11, 7}};
  EXPECT_EQ(rad(VertexInstance{1, 0, 10}, table, 20), 10);
  EXPECT_EQ(rad(VertexInstance{1, 2, 11}, table, 20), 47);

  DagTask diamond{1, 100, {{1, "a", 1}, {2, "b", 2}, {3, "c", 4}, {4, "d", 1}}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}},
                  {{4, 6}}};
  auto diamond_table = rad_base_table(TaskSet{{diamond}});
  EXPECT_EQ(rad(VertexInstance{1, 1, 1}, diamond_table, 100), 106);
}

TEST(PriorityKeys, GedfRad) {
  RadBaseTable table;
  table.entries[2] = {{1, 47}, {3, 50}};
  table.entries[5] = {{4, 47}};
  auto k47 = priority_key_gedf_rad({2, 0, 1}, table, 100);
  auto k50 = priority_key_gedf_rad({2, 0, 3}, table, 100);
  auto k47_task5 = priority_key_gedf_rad({5, 0, 4}, table, 100);
  EXPECT_LT(k47, k50);
  EXPECT_LT(k47, k47_task5);

  // A sink and its ancestor share the RAD, so the vertex id decides.
  table.entries[7] = {{8, 30}, {9, 30}};
  EXPECT_LT(priority_key_gedf_rad({7, 0, 8}, table, 10), priority_key_gedf_rad({7, 0, 9}, table, 10));
}

TEST(PriorityKeys, WcFifo) {
  VertexInstance a{3, 0, 1}, b{1, 0, 2};
  a.ready_at = 3;
  b.ready_at = 5;
  EXPECT_LT(priority_key_wc_fifo(a), priority_key_wc_fifo(b));
  b.ready_at = 3;
  EXPECT_LT(priority_key_wc_fifo(b), priority_key_wc_fifo(a));
}

TEST(PriorityKeys, Rm) {
  VertexInstance fast{9, 0, 1}, slow{1, 0, 2};
  fast.ready_at = 10;
  slow.ready_at = 0;
  EXPECT_LT(priority_key_rm(fast, 20), priority_key_rm(slow, 100));
  VertexInstance early{1, 0, 5}, late{1, 0, 3};
  early.ready_at = 2;
  late.ready_at = 4;
  EXPECT_LT(priority_key_rm(early, 50), priority_key_rm(late, 50));
  VertexInstance t1{1, 0, 7}, t2{2, 0, 6};
  t1.ready_at = t2.ready_at = 0;
  EXPECT_LT(priority_key_rm(t1, 50), priority_key_rm(t2, 50));
}

TEST(DetectMiss, Examples) {
  EXPECT_FALSE(detect_miss(9, 10, 3000));
  EXPECT_FALSE(detect_miss(10, 10, 3000));
  EXPECT_TRUE(detect_miss(11, 10, 3000));
  EXPECT_TRUE(detect_miss(std::nullopt, 2990, 3000));
  EXPECT_FALSE(detect_miss(std::nullopt, 3010, 3000));
}

TEST(JobInstance, DeadlinesShiftByPeriod) {
  DagTask t{1, 20, {{1, "a", 1}, {2, "b", 1}, {3, "c", 1}}, {{1, 2}, {1, 3}}, {{2, 10}, {3, 7}}};
  auto job = JobInstance::of(t, 3);
  EXPECT_EQ(job.release, 60);
  EXPECT_EQ(job.deadlines, (std::map<VertexId, Time>{{2, 70}, {3, 67}}));
}

TEST(Run, ChainWithoutContention) {
  TaskSet ts{{DagTask{1, 100, {{1, "a", 2}, {2, "b", 3}}, {{1, 2}}, {{2, 5}}}}};
  auto r = simulate(ts, 1, 100, PolicyId::GedfRad);
  EXPECT_EQ(instance(r, 1, 0, 1).started_at, 0);
  EXPECT_EQ(instance(r, 1, 0, 1).finished_at, 2);
  EXPECT_EQ(instance(r, 1, 0, 2).started_at, 2);
  EXPECT_EQ(instance(r, 1, 0, 2).finished_at, 5);
  ASSERT_EQ(r.sinks.size(), 1u);
  EXPECT_EQ(r.sinks[0].finish, 5);
  EXPECT_FALSE(r.sinks[0].missed);
}

TEST(Run, EarlierDeadlineFirst) {
  TaskSet ts{{single(1, 1, 5, 10, 5), single(2, 2, 4, 10, 9)}};
  auto r = simulate(ts, 1, 10, PolicyId::GedfRad);
  EXPECT_EQ(instance(r, 1, 0, 1).started_at, 0);
  EXPECT_EQ(instance(r, 1, 0, 1).finished_at, 5);
  EXPECT_EQ(instance(r, 2, 0, 2).started_at, 5);
  EXPECT_EQ(instance(r, 2, 0, 2).finished_at, 9);
  EXPECT_EQ(r.miss_count, 0u);
}

TEST(Run, FifoTieBreaksOnTaskId) {
  // task 2 listed first; equal ready times fall through to task_id
  TaskSet ts{{single(2, 2, 4, 10, 9), single(1, 1, 5, 10, 5)}};
  auto r = simulate(ts, 1, 10, PolicyId::WcFifo);
  EXPECT_EQ(instance(r, 1, 0, 1).started_at, 0);
  EXPECT_EQ(instance(r, 2, 0, 2).started_at, 5);
  EXPECT_EQ(instance(r, 2, 0, 2).finished_at, 9);
  EXPECT_EQ(r.miss_count, 0u);
}

TEST(Run, SerializedChainsMiss) {
  TaskSet ts{{DagTask{1, 10, {{1, "a", 3}, {2, "b", 3}}, {{1, 2}}, {{2, 6}}},
              DagTask{2, 10, {{3, "a", 3}, {4, "b", 3}}, {{3, 4}}, {{4, 6}}}}};
  auto r = simulate(ts, 1, 20, PolicyId::GedfRad);
  EXPECT_EQ(instance(r, 1, 0, 2).finished_at, 6);
  EXPECT_EQ(instance(r, 2, 0, 4).finished_at, 12);
  EXPECT_GE(r.miss_count, 1u);
  bool found = false;
  for (const auto& s : r.sinks) {
    if (s.task == 2 && s.k == 0) {
      found = true;
      EXPECT_TRUE(s.missed);
      EXPECT_EQ(s.deadline, 6);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Run, UnfinishedSinkBeforeEndIsMiss) {
  TaskSet ts{{single(1, 1, 50, 100, 40)}};
  auto r = simulate(ts, 1, 45, PolicyId::GedfRad);
  ASSERT_EQ(r.sinks.size(), 1u);
  EXPECT_EQ(r.sinks[0].finish, std::nullopt);
  EXPECT_TRUE(r.sinks[0].missed);
  // deadlines past the end are not classified
  auto r2 = simulate(ts, 1, 30, PolicyId::GedfRad);
  EXPECT_TRUE(r2.sinks.empty());
  EXPECT_EQ(r2.miss_count, 0u);
}

TEST(Run, PreemptionByUrgentWork) {
  // long low-urgency job, then an urgent one released at t=10 on one core
  TaskSet ts{{single(1, 1, 30, 100, 100), single(2, 2, 5, 10, 6)}};
  auto np = simulate(ts, 1, 60, PolicyId::GedfRad, Mode::NonPreemptive);
  auto p = simulate(ts, 1, 60, PolicyId::GedfRad, Mode::Preemptive);
  // t=0: task 2 (RAD 6) runs first in both modes; at 5 task 1 starts.
  EXPECT_EQ(instance(np, 2, 1, 2).started_at, 35);
  EXPECT_EQ(instance(p, 2, 1, 2).started_at, 10);
  // task 1 runs in the gaps [5,10), [15,20), ... and completes exactly at the end
  EXPECT_EQ(instance(p, 1, 0, 1).finished_at, 60);
  std::size_t preempts = 0;
  for (const auto& e : p.trace) preempts += e.event == TraceEventKind::Preempt;
  EXPECT_EQ(preempts, 5u);
}

TEST(Run, InvalidInputs) {
  TaskSet ts{{single(1, 1, 5, 10, 5)}};
  EXPECT_THROW(run(ts, SimConfig{1, 10, PolicyId::Rm, Mode::NonPreemptive, false}, ExecAssignment{}), Error);
  EXPECT_THROW(run(ts, SimConfig{1, 10, PolicyId::Rm, Mode::NonPreemptive, false}, ExecAssignment{{1, 0}}), Error);
  EXPECT_THROW(run(ts, SimConfig{0, 10, PolicyId::Rm, Mode::NonPreemptive, false}, ExecAssignment{{1, 5}}), Error);
  EXPECT_THROW(run(ts, SimConfig{1, 0, PolicyId::Rm, Mode::NonPreemptive, false}, ExecAssignment{{1, 5}}), Error);
  try {
    run(ts, SimConfig{1, 10, PolicyId::Rm, Mode::NonPreemptive, false}, ExecAssignment{{1, -2}});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidExecAssignment);
  }
}

TEST(Run, HyperPeriodWarning) {
  TaskSet ts{{single(1, 1, 1, 10, 5), single(2, 2, 1, 15, 5)}};
  EXPECT_TRUE(simulate(ts, 1, 30, PolicyId::Rm).warnings.empty());
  EXPECT_EQ(simulate(ts, 1, 31, PolicyId::Rm).warnings.size(), 1u);
}

TEST(Run, TraceJsonLines) {
  TaskSet ts{{DagTask{1, 10, {{1, "a", 3}, {2, "b", 3}}, {{1, 2}}, {{2, 6}}},
              DagTask{2, 10, {{3, "a", 3}, {4, "b", 3}}, {{3, 4}}, {{4, 6}}}}};
  auto r = simulate(ts, 1, 20, PolicyId::GedfRad);
  auto text = json_io::trace_jsonl(r.trace);
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0, misses = 0;
  Time last = 0;
  while (std::getline(in, line)) {
    auto j = json_io::Json::parse(line);
    EXPECT_EQ(j.size(), 6u);
    for (auto key : {"t_us", "core", "task", "k", "vertex", "event"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_GE(j["t_us"].get<Time>(), last);
    last = j["t_us"].get<Time>();
    if (j["event"] == "miss") {
      ++misses;
      EXPECT_TRUE(j["core"].is_null());
    }
    ++n;
  }
  EXPECT_EQ(n, r.trace.size());
  EXPECT_EQ(misses, r.miss_count);
  EXPECT_EQ(r.trace.front().event, TraceEventKind::Release);
}

TEST(Run, Deterministic) {
  auto w = generate(default_template(), GenConfig{42, Rational(6, 5), {Rational(9, 10), Rational(9, 10)}});
  for (PolicyId p : kAllPolicies) {
    for (Mode m : {Mode::NonPreemptive, Mode::Preemptive}) {
      SimConfig cfg{7, ms(3000), p, m, true};
      auto a = run(w.taskset, cfg, w.exec);
      auto b = run(w.taskset, cfg, w.exec);
      EXPECT_EQ(a.sinks, b.sinks);
      EXPECT_EQ(a.trace, b.trace);
      EXPECT_EQ(a.miss_count, b.miss_count);
    }
  }
}

TEST(Run, ScheduleInvariantsOnRandomSets) {
  std::mt19937_64 rng(2024);
  mt::RandomTaskSetSpec spec;
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = mt::random_instance(rng, spec);
    int cores = std::uniform_int_distribution<int>(1, 3)(rng);
    Time duration = std::uniform_int_distribution<Time>(50, 200)(rng);
    for (PolicyId p : kAllPolicies) {
      for (Mode m : {Mode::NonPreemptive, Mode::Preemptive}) {
        auto r = run(inst.taskset, SimConfig{cores, duration, p, m, true}, inst.exec);
        auto segs = mt::segments_from_trace(r.trace, duration);
        ASSERT_EQ(mt::check_core_exclusivity(segs), "");
        ASSERT_EQ(mt::check_precedence(inst.taskset, r), "");
        ASSERT_EQ(mt::check_work_conserving(r, cores, duration, segs), "");
        for (const auto& i : r.instances) {
          if (m == Mode::NonPreemptive && i.finished_at) ASSERT_EQ(*i.finished_at - *i.started_at, i.exec);
          if (i.ready_at) ASSERT_GE(*i.ready_at, i.k * inst.taskset.task(i.task_id).period);
        }
      }
    }
  }
}

TEST(Run, AgreesWithTickReference) {
  std::mt19937_64 rng(77);
  mt::RandomTaskSetSpec spec;
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = mt::random_instance(rng, spec);
    int cores = std::uniform_int_distribution<int>(1, 3)(rng);
    Time duration = std::uniform_int_distribution<Time>(1, 200)(rng);
    for (PolicyId p : kAllPolicies) {
      for (Mode m : {Mode::NonPreemptive, Mode::Preemptive}) {
        ASSERT_EQ(mt::compare_with_tick(inst.taskset, inst.exec, cores, duration, m, p, mt::tick_key_for(p)), "")
            << "trial " << trial << " policy " << to_string(p) << " mode " << to_string(m);
      }
    }
  }
}

TEST(Run, IsolatedTaskFinishesAtCriticalPath) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = mt::random_dag(rng, 1, 1, {1, 8});
    Time sum = 0;
    for (const auto& v : t.vertices) sum += v.wcet;
    t.period = sum;
    t.deadlines = assign_deadlines(t, 1);
    TaskSet ts{{t}};
    for (PolicyId p : kAllPolicies) {
      auto r = simulate(ts, static_cast<int>(t.vertices.size()), 3 * sum, p);
      EXPECT_EQ(r.miss_count, 0u);
      for (const auto& s : r.sinks) EXPECT_EQ(*s.finish - s.k * t.period, critical_path_length(t, s.sink));
    }
  }
}
