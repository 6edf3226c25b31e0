#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "thcsim/config.hpp"
#include "thcsim/geometry.hpp"
#include "thcsim/types.hpp"

namespace thcsim {

// Velocity first, then position with the updated velocity. The velocity is
// scaled back to `speed_limit` when it would exceed it.
UavState integrate(const UavState& state, const Vec3& accel,
                   double sampling_time, double speed_limit);

struct AuxRecord {
  UavState state;
  Vec3 accel = Vec3::Zero();  // composed command applied during this step
  Vec3 goal = Vec3::Zero();
  int waypoint_index = 0;
  std::array<bool, 4> active{};  // tasks 1..4
  std::vector<LosGeometry> los;  // one per obstacle
  std::vector<bool> occluded;    // one per obstacle
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  UavState main;
  MainActivity activity = MainActivity::kReachability;
  std::vector<AuxRecord> aux;
};

struct SimHistory {
  ScenarioConfig config;
  std::vector<StepRecord> steps;  // step_count + 1 records
  std::vector<std::string> warnings;
};

// Runs a validated configuration. Throws kDivergentRollouts (message carries
// the step index) and kInvalidConfig when validate_config reports anything.
SimHistory run(const ScenarioConfig& cfg);

// One row per (step, UAV); see README for the column list.
void write_history_csv(const SimHistory& history, std::ostream& out);

std::vector<std::string> history_csv_columns();

}  // namespace thcsim
