#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "thcsim/config.hpp"
#include "thcsim/geometry.hpp"
#include "thcsim/types.hpp"

namespace thcsim {

enum class TaskId : int {
  kCollision = 1,
  kDistance = 2,
  kLineOfSight = 3,
  kGoTo = 4,
};

struct TaskOutput {
  TaskId task_id = TaskId::kGoTo;
  bool active = false;
  Eigen::VectorXd error;
  Eigen::MatrixX3d jacobian;  // rows x 3; empty when inactive
  Vec3 accel_cmd = Vec3::Zero();

  int priority() const { return static_cast<int>(task_id); }

  static TaskOutput inactive(TaskId id);
};

// Radial field around `center`. `core_radius` shifts the distance origin to a
// sphere surface, so for obstacles d is the distance to the obstacle surface.
struct PotentialField {
  enum class Kind { kRepulsive, kShellAttractive };

  Vec3 center = Vec3::Zero();
  double core_radius = 0.0;
  double influence_radius = 1.0;  // d0
  double gain = 1.0;              // eta
  Kind kind = Kind::kRepulsive;

  double distance(const Vec3& p) const { return (p - center).norm() - core_radius; }
};

// Phi(d) = 0.5 eta (1/d - 1/d0)^2 for d < d0, else 0.
double repulsive_potential(const Vec3& p, const PotentialField& field);

// -grad Phi, clamped to `accel_limit`. Throws kSingularField at the center.
Vec3 repulsive_accel(const Vec3& p, const PotentialField& field,
                     double accel_limit);

TaskOutput task1_collision(const UavState& aux,
                           std::span<const Obstacle> obstacles,
                           std::span<const Vec3> other_uavs,
                           const SimParams& params);

TaskOutput task2_distance(const UavState& aux, const UavState& main,
                          double viewpoint_distance, const SimParams& params);

// Memory of the Task-3 PID, owned by the simulation per auxiliary UAV.
struct LosControllerState {
  int obstacle = -1;
  std::optional<double> previous_error;
  double integral = 0.0;

  void reset() { *this = LosControllerState{}; }
};

// Signed clearance |p3 - p2| (negative when penetrating), with the axial
// tie-break applied.
double los_clearance(const Vec3& aux, const Vec3& main, const Obstacle& obs,
                     double apex_angle);

inline constexpr double kClearanceJacobianStep = 1e-5;

// d clearance / d aux position by central differences; falls back to a
// one-sided difference when a probe crosses a closest-point branch.
Eigen::RowVector3d los_clearance_jacobian(const Vec3& aux, const Vec3& main,
                                          const Obstacle& obs,
                                          double apex_angle,
                                          double step = kClearanceJacobianStep);

TaskOutput task3_los(const UavState& aux, const UavState& main,
                     std::span<const Obstacle> obstacles,
                     const SimParams& params, LosControllerState& state);

TaskOutput task4_goto(const UavState& aux, const Vec3& goal,
                      const Vec3& controller_output, double accel_limit);

}  // namespace thcsim
