#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace thcsim {

// World frame: right-handed, z up. Lengths in meters, time in seconds.
using Vec3 = Eigen::Vector3d;

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

struct UavState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

// Static spherical obstacle.
struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

// Axis-aligned box.
struct Bounds {
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Constant(22.0);

  bool contains(const Vec3& p, double margin = 0.0) const {
    return (p.array() >= lower.array() - margin).all() &&
           (p.array() <= upper.array() + margin).all();
  }

  // Clamps into the box shrunk by `margin` on every side.
  Vec3 clamp(const Vec3& p, double margin = 0.0) const {
    Vec3 lo = lower.array() + margin;
    Vec3 hi = upper.array() - margin;
    return p.cwiseMax(lo).cwiseMin(hi);
  }
};

enum class MainActivity { kReachability, kManipulability };

const char* to_string(MainActivity activity);

// Scales `v` down so that its computed norm never exceeds `limit`.
Vec3 clamp_norm(const Vec3& v, double limit);

}  // namespace thcsim
