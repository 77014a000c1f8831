#include <gtest/gtest.h>

#include <random>

#include "mdag/default_template.hpp"
#include "mdag/json_io.hpp"
#include "support/random_dag.hpp"

using namespace mdag;
using json_io::Json;

TEST(GraphJson, RoundTripsShippedTemplate) {
  auto g = default_callback_graph();
  auto j = json_io::to_json(g);
  EXPECT_EQ(json_io::graph_from_json(Json::parse(j.dump())), g);
}

TEST(GraphJson, Schema) {
  auto j = Json::parse(R"({
    "callbacks": [
      {"id": 1, "name": "t", "kind": "timer", "period_us": 100, "wcet_us": 2},
      {"id": 2, "name": "s", "kind": "subscription", "wcet_us": 3},
      {"id": 3, "name": "j", "kind": "sync", "wcet_us": 1}
    ],
    "edges": [{"src": 1, "dst": 2, "kind": "pubsub"}, {"src": 2, "dst": 3, "kind": "queue"}]
  })");
  auto g = json_io::graph_from_json(j);
  ASSERT_EQ(g.callbacks.size(), 3u);
  EXPECT_EQ(g.callbacks[0].period, 100);
  EXPECT_EQ(g.callbacks[2].kind, CallbackKind::Sync);
  EXPECT_EQ(g.edges[1].kind, EdgeKind::Queue);
}

TEST(GraphJson, RejectsUnknownAndMalformed) {
  auto expect_parse_error = [](const char* text) {
    try {
      json_io::graph_from_json(Json::parse(text));
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error&) {
    }
  };
  expect_parse_error(R"({"callbacks": [], "extra": 1})");
  expect_parse_error(R"({"callbacks": [{"id": 1, "name": "t", "kind": "timer", "period_us": 1, "wcet_us": 1, "x": 0}]})");
  expect_parse_error(R"({"callbacks": [{"id": 1, "name": "t", "kind": "bogus", "wcet_us": 1}]})");
  expect_parse_error(R"({"callbacks": [{"id": 1, "name": "t", "kind": "timer", "wcet_us": 1}]})");
  expect_parse_error(R"({"callbacks": [{"id": "1", "name": "t", "kind": "timer", "period_us": 1, "wcet_us": 1}]})");
  expect_parse_error(R"({"callbacks": [{"id": 1, "name": "t", "kind": "timer", "period_us": 1, "wcet_us": 1}],
                         "edges": [{"src": 1, "dst": 1, "kind": "pubsub", "weight": 2}]})");
  expect_parse_error(R"({"edges": []})");
}

TEST(TaskSetJson, RoundTripWithAndWithoutExec) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    auto inst = mdag::testing::random_instance(rng, {});
    auto plain = json_io::taskset_document_from_json(Json::parse(json_io::to_json(inst.taskset).dump()));
    EXPECT_EQ(plain.taskset, inst.taskset);
    EXPECT_FALSE(plain.exec.has_value());
    auto with = json_io::taskset_document_from_json(Json::parse(json_io::to_json(inst.taskset, &inst.exec).dump()));
    EXPECT_EQ(with.taskset, inst.taskset);
    EXPECT_EQ(with.exec, inst.exec);
  }
}

TEST(TaskSetJson, Schema) {
  auto j = Json::parse(R"({"tasks": [{"task_id": 1, "period_us": 100,
      "vertices": [{"id": 1, "name": "a", "wcet_us": 2}, {"id": 2, "name": "b", "wcet_us": 3}],
      "edges": [[1, 2]], "deadlines": {"2": 6}}]})");
  auto ts = json_io::taskset_from_json(j);
  EXPECT_EQ(ts.tasks[0].deadlines.at(2), 6);

  auto bad = j;
  bad["tasks"][0]["deadlines"] = Json::parse(R"({"1": 6})");
  EXPECT_THROW(json_io::taskset_from_json(bad), Error);
  bad = j;
  bad["tasks"][0]["priority"] = 1;
  EXPECT_THROW(json_io::taskset_from_json(bad), Error);
  bad = j;
  bad["tasks"][0]["vertices"][0]["exec_us"] = 1;  // only some vertices
  EXPECT_THROW(json_io::taskset_from_json(bad), Error);
  bad = j;
  bad["tasks"][0]["edges"] = Json::parse("[[1, 2, 3]]");
  EXPECT_THROW(json_io::taskset_from_json(bad), Error);
}

TEST(Files, IoErrorsAreDistinct) {
  EXPECT_THROW(json_io::read_text_file("/nonexistent/dir/file.json"), IoError);
  EXPECT_THROW(json_io::write_text_file("/nonexistent/dir/file.json", "x"), IoError);
}
