#pragma once

// Shipped Autoware-like callback graph. It is representative, not a copy of
// any measured system: nine sub-DAGs after queue-edge splitting, periods
// {20, 30, 50, 100, 150, 300, 500, 1000, 3000} ms (hyper-period 3000 ms),
// two sync joins in the LiDAR pipeline, two multi-sink tasks, and feedback
// loops that close only through queue edges. WCETs put the WCET-based total
// utilization just under 7.

#include "mdag/taskmodel.hpp"
#include "mdag/workload.hpp"

namespace mdag {

inline CallbackGraph default_callback_graph() {
  using K = CallbackKind;
  auto timer = [](VertexId id, const char* name, Time period, Time wcet) {
    return Callback{id, name, K::Timer, period, wcet};
  };
  auto sub = [](VertexId id, const char* name, Time wcet) {
    return Callback{id, name, K::Subscription, std::nullopt, wcet};
  };
  auto sync = [](VertexId id, const char* name, Time wcet) {
    return Callback{id, name, K::Sync, std::nullopt, wcet};
  };

  CallbackGraph g;
  g.callbacks = {
      // localization, 20 ms
      timer(1, "ekf_localizer", ms(20), ms(7)),
      sub(2, "stop_filter", ms(4)),
      sub(3, "twist2accel", ms(3)),
      sub(4, "localization_error_monitor", ms(3)),
      // control, 30 ms
      timer(5, "trajectory_follower", ms(30), ms(15)),
      sub(6, "vehicle_cmd_gate", ms(10)),
      // imu, 50 ms
      timer(7, "imu_corrector", ms(50), ms(15)),
      sub(8, "gyro_odometer", ms(20)),
      // lidar preprocessing, 100 ms
      timer(9, "lidar_driver", ms(100), ms(8)),
      sub(10, "crop_box_filter_front", ms(20)),
      sub(11, "crop_box_filter_rear", ms(20)),
      sync(12, "concatenate_data", ms(10)),
      sub(13, "ground_filter", ms(15)),
      sub(14, "voxel_grid_downsample", ms(10)),
      sub(15, "ndt_scan_matcher", ms(20)),
      sync(16, "occupancy_grid_map", ms(15)),
      // object perception, 150 ms
      timer(17, "lidar_centerpoint", ms(150), ms(55)),
      sub(18, "shape_estimation", ms(15)),
      sub(19, "multi_object_tracker", ms(20)),
      sub(20, "map_based_prediction", ms(35)),
      // planning, 300 ms
      timer(21, "behavior_path_planner", ms(300), ms(90)),
      sub(22, "behavior_velocity_planner", ms(70)),
      sub(23, "obstacle_cruise_planner", ms(40)),
      sub(24, "motion_velocity_smoother", ms(40)),
      // map, 500 ms
      timer(25, "dynamic_map_loader", ms(500), ms(300)),
      // diagnostics, 1000 ms
      timer(26, "diagnostic_aggregator", ms(1000), ms(300)),
      sub(27, "system_error_monitor", ms(300)),
      // mission, 3000 ms
      timer(28, "mission_planner", ms(3000), ms(1800)),
  };

  auto ps = [](VertexId a, VertexId b) { return CallbackEdge{a, b, EdgeKind::PubSub}; };
  auto q = [](VertexId a, VertexId b) { return CallbackEdge{a, b, EdgeKind::Queue}; };
  g.edges = {
      ps(1, 2), ps(2, 3), ps(1, 4),
      ps(5, 6),
      ps(7, 8),
      ps(9, 10), ps(9, 11), ps(10, 12), ps(11, 12), ps(12, 13), ps(13, 14), ps(14, 15),
      ps(12, 16), ps(13, 16),
      ps(17, 18), ps(18, 19), ps(19, 20),
      ps(21, 22), ps(22, 23), ps(23, 24),
      ps(26, 27),
      // queue / take-API edges, including the ndt <-> ekf feedback loop
      q(15, 1), q(1, 15), q(8, 1), q(3, 5), q(24, 5), q(1, 5),
      q(14, 17), q(16, 21), q(20, 21), q(20, 23), q(25, 15), q(25, 21),
      q(28, 21), q(6, 26), q(15, 26),
  };
  return g;
}

inline WorkloadTemplate default_template() {
  WorkloadTemplate t;
  t.graph = default_callback_graph();
  t.sampler = default_sampler(t.graph);
  return t;
}

}  // namespace mdag
