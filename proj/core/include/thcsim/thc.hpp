#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "thcsim/tasks.hpp"
#include "thcsim/types.hpp"

namespace thcsim {

// J^T (J J^T + damping^2 I)^-1.
Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& jacobian,
                                      double damping);

// Smallest singular value below which damping is phased in.
inline constexpr double kSingularRegion = 1e-2;

// Damping actually applied for `jacobian`: zero when its smallest singular
// value is at least kSingularRegion, rising smoothly to `damping` at a
// singularity.
double effective_damping(const Eigen::MatrixXd& jacobian, double damping);

// I - J^+ J, with J^+ damped by effective_damping(J, damping).
Eigen::Matrix3d null_space_projector(const Eigen::MatrixX3d& jacobian,
                                     double damping);

// Ordered task list, highest priority first.
class PriorityStack {
 public:
  PriorityStack() = default;

  // Throws std::invalid_argument unless `task` ranks strictly below the
  // last pushed task.
  void push(TaskOutput task);

  std::span<const TaskOutput> tasks() const { return tasks_; }

 private:
  std::vector<TaskOutput> tasks_;
};

// u = u1 + N1 (u2 + N2 (u3 + N3 u4)) over the active tasks, where N_i
// projects onto the common null space of the Jacobians of tasks 1..i. The
// result is clamped to `accel_limit`.
Vec3 compose(const PriorityStack& stack, double damping, double accel_limit);

}  // namespace thcsim
