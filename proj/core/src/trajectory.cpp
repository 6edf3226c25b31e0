#include "thcsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thcsim {

const char* to_string(TrajectoryScript::Kind kind) {
  return kind == TrajectoryScript::Kind::kPolyline ? "polyline" : "figure_eight";
}

UavState TrajectoryScript::evaluate(double t) const {
  UavState s;
  if (kind == Kind::kFigureEight) {
    const double w = 2.0 * std::numbers::pi / period;
    const double s1 = std::sin(w * t), c1 = std::cos(w * t);
    const double s2 = std::sin(2.0 * w * t), c2 = std::cos(2.0 * w * t);
    s.position = center + Vec3(amplitude.x() * s1, amplitude.y() * s2, amplitude.z() * s1);
    s.velocity = Vec3(amplitude.x() * w * c1, 2.0 * amplitude.y() * w * c2,
                      amplitude.z() * w * c1);
    return s;
  }

  if (waypoints.empty()) return s;
  double remaining = std::max(0.0, speed * t);
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec3 seg = waypoints[i + 1] - waypoints[i];
    const double len = seg.norm();
    if (len == 0.0) continue;
    if (remaining < len) {
      s.position = waypoints[i] + seg * (remaining / len);
      s.velocity = seg * (speed / len);
      return s;
    }
    remaining -= len;
  }
  s.position = waypoints.back();
  return s;
}

double TrajectoryScript::max_speed() const {
  if (kind == Kind::kPolyline) return speed;
  double best = 0.0;
  constexpr int kSamples = 2048;
  for (int i = 0; i < kSamples; ++i) {
    best = std::max(best, evaluate(period * i / kSamples).velocity.norm());
  }
  return best;
}

}  // namespace thcsim
