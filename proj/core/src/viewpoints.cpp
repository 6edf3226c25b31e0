#include "thcsim/viewpoints.hpp"

#include <cmath>

namespace thcsim {

std::vector<Vec3> best_viewpoint_offsets(MainActivity activity) {
  const Vec3 up = Vec3::UnitZ();
  const Vec3 side = activity == MainActivity::kReachability
                        ? Vec3(Vec3::UnitX())    // front
                        : Vec3(-Vec3::UnitY());  // right
  return {(side + up).normalized(), up};
}

Vec3 viewpoint_offset(MainActivity activity, int aux_index) {
  const auto offsets = best_viewpoint_offsets(activity);
  return offsets[static_cast<std::size_t>(aux_index) % offsets.size()];
}

ViewpointGoal viewpoint_goal(const Vec3& main_position, const Vec3& heading,
                             MainActivity activity, double viewpoint_distance,
                             int aux_index) {
  Vec3 forward(heading.x(), heading.y(), 0.0);
  forward = forward.norm() > 0.0 ? forward.normalized() : Vec3::UnitX();
  const Vec3 up = Vec3::UnitZ();
  const Vec3 left = up.cross(forward);

  const Vec3 local = viewpoint_offset(activity, aux_index);
  const Vec3 world = local.x() * forward + local.y() * left + local.z() * up;
  return {aux_index, main_position + viewpoint_distance * world, activity};
}

const Vec3& HeadingTracker::update(const Vec3& velocity) {
  const Vec3 horizontal(velocity.x(), velocity.y(), 0.0);
  const double speed = horizontal.norm();
  if (speed > kMinSpeed) heading_ = horizontal / speed;
  return heading_;
}

}  // namespace thcsim
