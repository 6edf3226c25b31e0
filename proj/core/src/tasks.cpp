#include "thcsim/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thcsim/error.hpp"
#include "thcsim/thc.hpp"

namespace thcsim {

TaskOutput TaskOutput::inactive(TaskId id) {
  TaskOutput out;
  out.task_id = id;
  out.active = false;
  out.error = Eigen::VectorXd(0);
  out.jacobian = Eigen::MatrixX3d(0, 3);
  return out;
}

double repulsive_potential(const Vec3& p, const PotentialField& field) {
  const double d = field.distance(p);
  if (d >= field.influence_radius) return 0.0;
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  const double g = 1.0 / d - 1.0 / field.influence_radius;
  return 0.5 * field.gain * g * g;
}

Vec3 repulsive_accel(const Vec3& p, const PotentialField& field, double accel_limit) {
  const Vec3 radial = p - field.center;
  const double r = radial.norm();
  if (r == 0.0) throw Error(ErrorCode::kSingularField, "point sits on the field center");
  const double d = r - field.core_radius;
  if (d >= field.influence_radius) return Vec3::Zero();
  const Vec3 dir = radial / r;
  // Inside the core the field is unbounded; push out at full authority.
  if (d <= 0.0) return dir * accel_limit;
  const double magnitude =
      field.gain * (1.0 / d - 1.0 / field.influence_radius) / (d * d);
  return clamp_norm(dir * magnitude, accel_limit);
}

TaskOutput task1_collision(const UavState& aux, std::span<const Obstacle> obstacles,
                           std::span<const Vec3> other_uavs, const SimParams& params) {
  const double d0 = params.collision_influence_radius;
  const double eta = params.gains.repulsion_gain;

  std::vector<PotentialField> fields;
  fields.reserve(obstacles.size() + other_uavs.size());
  for (const auto& o : obstacles) {
    fields.push_back({o.center, o.radius, d0, eta, PotentialField::Kind::kRepulsive});
  }
  for (const auto& q : other_uavs) {
    fields.push_back({q, 0.0, d0, eta, PotentialField::Kind::kRepulsive});
  }

  Vec3 accel = Vec3::Zero();
  const PotentialField* nearest = nullptr;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (const auto& f : fields) {
    const double d = f.distance(aux.position);
    if (d >= d0) continue;
    accel += repulsive_accel(aux.position, f, params.accel_limit);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = &f;
    }
  }
  if (nearest == nullptr) return TaskOutput::inactive(TaskId::kCollision);

  TaskOutput out;
  out.task_id = TaskId::kCollision;
  out.active = true;
  out.error = Eigen::VectorXd::Constant(1, d0 - nearest_d);
  out.jacobian = (aux.position - nearest->center).normalized().transpose();
  out.accel_cmd = clamp_norm(accel, params.accel_limit);
  return out;
}

TaskOutput task2_distance(const UavState& aux, const UavState& main,
                          double viewpoint_distance, const SimParams& params) {
  const Vec3 rel = aux.position - main.position;
  const double dist = rel.norm();
  if (dist == 0.0) throw Error(ErrorCode::kSingularField, "auxiliary UAV coincides with main UAV");
  const Vec3 n = rel / dist;
  const double error = dist - viewpoint_distance;
  const double radial_speed = (aux.velocity - main.velocity).dot(n);
  const auto& g = params.gains.distance;

  TaskOutput out;
  out.task_id = TaskId::kDistance;
  out.active = true;
  out.error = Eigen::VectorXd::Constant(1, error);
  out.jacobian = n.transpose();
  out.accel_cmd = clamp_norm((-g.k_p * error - g.k_d * radial_speed) * n, params.accel_limit);
  return out;
}

double los_clearance(const Vec3& aux, const Vec3& main, const Obstacle& obs,
                     double apex_angle) {
  return los_geometry_tiebreak(aux, main, obs, apex_angle, 0.0).clearance;
}

namespace {

// Which part of the segment p1 falls on: 0 aux end, 1 interior, 2 main end.
int closest_branch(const Vec3& aux, const Vec3& main, const Vec3& c) {
  const Vec3 ab = main - aux;
  const double t = (c - aux).dot(ab) / ab.squaredNorm();
  if (t <= 0.0) return 0;
  if (t >= 1.0) return 2;
  return 1;
}

}  // namespace

Eigen::RowVector3d los_clearance_jacobian(const Vec3& aux, const Vec3& main,
                                          const Obstacle& obs, double apex_angle,
                                          double step) {
  const double c0 = los_clearance(aux, main, obs, apex_angle);
  const int branch = closest_branch(aux, main, obs.center);
  Eigen::RowVector3d jac;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 plus = aux, minus = aux;
    plus[axis] += step;
    minus[axis] -= step;
    const double cp = los_clearance(plus, main, obs, apex_angle);
    const double cm = los_clearance(minus, main, obs, apex_angle);
    const bool plus_ok = closest_branch(plus, main, obs.center) == branch;
    const bool minus_ok = closest_branch(minus, main, obs.center) == branch;
    if (plus_ok == minus_ok) {
      jac[axis] = (cp - cm) / (2.0 * step);
    } else if (plus_ok) {
      jac[axis] = (cp - c0) / step;
    } else {
      jac[axis] = (c0 - cm) / step;
    }
  }
  return jac;
}

TaskOutput task3_los(const UavState& aux, const UavState& main,
                     std::span<const Obstacle> obstacles, const SimParams& params,
                     LosControllerState& state) {
  int worst = -1;
  double worst_e3 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const LosGeometry g = los_geometry_tiebreak(aux.position, main.position, obstacles[i],
                                                params.fov_apex_angle, params.los_margin);
    if (g.los_case == LosCase::kSeparated) continue;
    if (g.e3 < worst_e3) {
      worst_e3 = g.e3;
      worst = static_cast<int>(i);
    }
  }
  if (worst < 0) {
    state.reset();
    return TaskOutput::inactive(TaskId::kLineOfSight);
  }
  if (state.obstacle != worst) {
    state.reset();
    state.obstacle = worst;
  }

  const double dt = params.sampling_time;
  const auto& g = params.gains;
  const double derivative = state.previous_error ? (worst_e3 - *state.previous_error) / dt : 0.0;
  state.integral = std::clamp(state.integral + worst_e3 * dt, -g.integral_limit, g.integral_limit);
  state.previous_error = worst_e3;

  const Eigen::RowVector3d jac = los_clearance_jacobian(
      aux.position, main.position, obstacles[worst], params.fov_apex_angle);
  const double pid = g.k_p * worst_e3 + g.k_d * derivative + g.k_i * state.integral;
  // J is the gradient of the clearance; a negative error must open the gap,
  // so the command runs against the PID output.
  const Eigen::MatrixXd pinv = damped_pseudo_inverse(jac, effective_damping(jac, params.dls_damping));
  const Vec3 accel = -(pinv * pid);

  TaskOutput out;
  out.task_id = TaskId::kLineOfSight;
  out.active = true;
  out.error = Eigen::VectorXd::Constant(1, worst_e3);
  out.jacobian = jac;
  out.accel_cmd = clamp_norm(accel, params.accel_limit);
  return out;
}

TaskOutput task4_goto(const UavState& aux, const Vec3& goal, const Vec3& controller_output,
                      double accel_limit) {
  TaskOutput out;
  out.task_id = TaskId::kGoTo;
  out.active = true;
  out.error = goal - aux.position;
  out.jacobian = Eigen::Matrix3d::Identity();
  out.accel_cmd = clamp_norm(controller_output, accel_limit);
  return out;
}

}  // namespace thcsim
