#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "thcsim/trajectory.hpp"
#include "thcsim/types.hpp"

namespace thcsim {

// Sampling-based goal controller (Task 4) parameters.
struct PicParams {
  int horizon = 25;              // steps
  int samples = 256;             // rollouts per control step
  double noise_sigma = 0.3;      // m/s^2, per axis
  double temperature = 0.5;      // cost units
  double control_cost = 0.02;    // weight on |u|^2 per step
  double obstacle_penalty = 40;  // weight on influence-zone intrusion^2 per step
  double goal_weight = 4.0;      // weight on terminal |x_H - goal|^2
};

struct PdGains {
  double k_p = 1.0;
  double k_d = 1.0;
};

struct ControllerGains {
  // PID on the line-of-sight clearance error (Task 3).
  double k_p = 6.0;
  double k_d = 3.0;
  double k_i = 0.5;
  double integral_limit = 5.0;  // anti-windup clamp, error*s
  // Shell field holding the distance to the main UAV (Task 2).
  PdGains distance{2.0, 3.0};
  // Repulsive field gain (Task 1).
  double repulsion_gain = 1.0;
  PicParams pic;
  // PD baseline for Task 4 when PIC is switched off.
  PdGains pid_goal{1.2, 0.8};
};

struct SimParams {
  double sampling_time = 0.1;              // s
  int step_count = 400;
  double fov_apex_angle = 0.5235987755982988;  // rad, full aperture (30 deg)
  double los_margin = 0.5;                 // gamma, m
  double viewpoint_distance = 5.0;         // alpha, m
  double collision_influence_radius = 1.0; // d0, m from obstacle surface
  double accel_limit = 3.0;                // m/s^2
  double speed_limit = 3.0;                // m/s
  double dls_damping = 1e-3;
  double waypoint_radius = 0.3;            // m
  int waypoint_refresh_steps = 10;
  double goal_bounds_margin = 1.0;         // m
  ControllerGains gains;
};

enum class GoalController { kPic, kPid };

const char* to_string(GoalController controller);

struct AblationToggles {
  bool task1 = true;
  bool task2 = true;
  bool task3 = true;
  GoalController controller = GoalController::kPic;
};

struct TaskSwitch {
  int step = 0;
  MainActivity activity = MainActivity::kReachability;
};

struct ScenarioConfig {
  std::string id = "custom";  // "1".."5" for the builtin scenarios
  Bounds bounds;
  std::vector<Obstacle> obstacles;
  int n_aux = 2;
  std::vector<Vec3> aux_start;  // one initial position per auxiliary UAV
  TrajectoryScript main_trajectory;
  // Optional explicit waypoints per auxiliary UAV, visited in order before
  // the UAV falls back to live best-viewpoint waypoints.
  std::vector<std::vector<Vec3>> waypoint_schedule;
  std::vector<TaskSwitch> main_task_schedule;
  SimParams params;
  AblationToggles ablation;
  std::uint64_t seed = 7;

  // Activity in force at `step` (last switch at or before it).
  MainActivity activity_at(int step) const;
};

struct Violation {
  std::string code;  // machine readable, e.g. "out_of_bounds"
  std::string path;  // JSON-pointer-like, e.g. "obstacles[0].radius"
  std::string message;
};

std::vector<Violation> validate_config(const ScenarioConfig& cfg);

// Canonical configurations for the five evaluation scenarios.
ScenarioConfig builtin_scenario(int id);

// Canonical JSON text (stable key order, two-space indent, trailing newline).
std::string serialize_config(const ScenarioConfig& cfg);

// Throws Error(kInvalidConfig) on malformed JSON or wrong field types.
// Invariant checks are left to validate_config.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

// 64-bit FNV-1a of the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace thcsim
