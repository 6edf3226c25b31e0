#pragma once

#include "thcsim/types.hpp"

namespace thcsim {

// Solid field-of-view cone with its apex at the observing UAV, its axis along
// the line of sight, truncated by the plane through `target` orthogonal to
// the axis.
struct ViewCone {
  Vec3 apex;
  Vec3 target;
  double apex_angle;  // full aperture, rad, in (0, pi)

  double half_angle() const { return 0.5 * apex_angle; }
  double height() const { return (target - apex).norm(); }
};

// Classification of an obstacle relative to the line-of-sight cone, measured
// along the perpendicular from the line of sight through the obstacle center.
enum class LosCase {
  kSeparated = 1,     // clearance exceeds the margin
  kWithinMargin = 2,  // cone and obstacle apart, closer than the margin
  kPenetrating = 3,   // cone surface point lies inside the obstacle
};

struct LosGeometry {
  Vec3 p1;  // closest point of the line of sight to the obstacle center
  Vec3 p2;  // cone surface point on the ray p1 -> center
  Vec3 p3;  // obstacle surface point on the same ray
  // Signed gap from p2 to p3 along the ray; |clearance| == |p3 - p2|.
  double clearance;
  double e3;  // clearance - margin
  LosCase los_case;
  bool p1_interior;  // p1 strictly between the two UAVs
};

// Closest point of segment [a, b] to c. Throws kDegenerateSegment if a == b.
Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& c);

// Throws kDegenerateSegment when aux == main and kAxialObstacle when the
// obstacle center lies within 1e-9 m of the line of sight.
LosGeometry los_geometry(const Vec3& aux, const Vec3& main,
                         const Obstacle& obs, double apex_angle,
                         double margin);

// Same construction, but an axial obstacle is pushed off the line of sight
// along the world-up direction projected orthogonal to it (world x when the
// line of sight is vertical).
LosGeometry los_geometry_tiebreak(const Vec3& aux, const Vec3& main,
                                  const Obstacle& obs, double apex_angle,
                                  double margin);

double e3_error(const LosGeometry& geom, double margin);

bool cone_contains(const ViewCone& cone, const Vec3& p);

// Euclidean distance from p to the solid cone (0 inside).
double distance_to_cone(const ViewCone& cone, const Vec3& p);

// distance_to_cone(center) - radius; <= 0 iff the solids intersect.
double cone_sphere_gap(const ViewCone& cone, const Obstacle& obs);

bool occludes(const ViewCone& cone, const Obstacle& obs);

inline constexpr double kDefaultVoxelsPerMeter = 20.0;

// Voxel estimate of vol(cone ∩ sphere). Voxels tile the sphere's bounding box
// with edge <= 1/voxels_per_meter; a voxel counts when its center lies in
// both solids.
double fov_obstacle_intersection_volume(
    const ViewCone& cone, const Obstacle& obs,
    double voxels_per_meter = kDefaultVoxelsPerMeter);

}  // namespace thcsim
