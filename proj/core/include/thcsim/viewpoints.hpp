#pragma once

#include <vector>

#include "thcsim/types.hpp"

namespace thcsim {

// Unit offsets in the main UAV frame (x forward, y left, z up). Front/top and
// top for reachability; right/top and top for manipulability.
std::vector<Vec3> best_viewpoint_offsets(MainActivity activity);

// Offset for auxiliary UAV `aux_index` (0-based), cycling the list above.
Vec3 viewpoint_offset(MainActivity activity, int aux_index);

struct ViewpointGoal {
  int aux_index = 0;
  Vec3 position = Vec3::Zero();
  MainActivity source_activity = MainActivity::kReachability;
};

// `heading` is the horizontal forward direction of the main UAV.
ViewpointGoal viewpoint_goal(const Vec3& main_position, const Vec3& heading,
                             MainActivity activity, double viewpoint_distance,
                             int aux_index);

// Forward direction from velocity; keeps the previous heading when the UAV
// is (nearly) hovering or climbing vertically.
class HeadingTracker {
 public:
  static constexpr double kMinSpeed = 0.1;

  explicit HeadingTracker(Vec3 initial = Vec3::UnitX()) : heading_(initial) {}

  const Vec3& update(const Vec3& velocity);
  const Vec3& heading() const { return heading_; }

 private:
  Vec3 heading_;
};

}  // namespace thcsim
