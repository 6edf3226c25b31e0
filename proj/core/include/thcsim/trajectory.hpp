#pragma once

#include <vector>

#include "thcsim/types.hpp"

namespace thcsim {

// Scripted motion of the main UAV.
struct TrajectoryScript {
  enum class Kind { kPolyline, kFigureEight };

  Kind kind = Kind::kPolyline;
  // kPolyline: traversed at constant `speed`, holding at the last vertex.
  std::vector<Vec3> waypoints;
  double speed = 0.5;
  // kFigureEight: p(t) = center + (ax sin(wt), ay sin(2wt), az sin(wt)),
  // w = 2 pi / period.
  Vec3 center = Vec3::Zero();
  Vec3 amplitude = Vec3::Zero();
  double period = 60.0;

  UavState evaluate(double t) const;
  double max_speed() const;
};

const char* to_string(TrajectoryScript::Kind kind);

}  // namespace thcsim
