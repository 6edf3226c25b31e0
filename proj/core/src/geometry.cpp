#include "thcsim/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "thcsim/error.hpp"

namespace thcsim {

namespace {

constexpr double kAxialTolerance = 1e-9;

struct SegmentProjection {
  Vec3 point;
  double t;  // parameter in [0, 1]
};

SegmentProjection project_on_segment(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) {
    throw Error(ErrorCode::kDegenerateSegment, "segment endpoints coincide");
  }
  const double t = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
  return {a + t * ab, t};
}

// Unit vector orthogonal to `axis`, preferring world up.
Vec3 tiebreak_direction(const Vec3& axis) {
  const Vec3 a = axis.normalized();
  Vec3 perp = Vec3::UnitZ() - Vec3::UnitZ().dot(a) * a;
  if (perp.norm() < 1e-6) perp = Vec3::UnitX() - Vec3::UnitX().dot(a) * a;
  return perp.normalized();
}

LosGeometry build(const Vec3& aux, const Vec3& main, const Obstacle& obs,
                  double apex_angle, double margin, bool tiebreak) {
  const SegmentProjection proj = project_on_segment(aux, main, obs.center);
  const Vec3 offset = obs.center - proj.point;
  double dist = offset.norm();
  Vec3 dir;
  if (dist <= kAxialTolerance) {
    if (!tiebreak) {
      throw Error(ErrorCode::kAxialObstacle, "obstacle center lies on the line of sight");
    }
    dir = tiebreak_direction(main - aux);
  } else {
    dir = offset / dist;
  }

  LosGeometry g;
  g.p1 = proj.point;
  const double cone_radius = (proj.point - aux).norm() * std::tan(0.5 * apex_angle);
  g.p2 = proj.point + dir * cone_radius;
  g.p3 = obs.center - dir * obs.radius;
  // Signed position of p3 along dir relative to p1 (negative when p1 is
  // inside the obstacle), so the gap keeps its sign through penetration.
  const double surface = dist - obs.radius;
  g.clearance = surface - cone_radius;
  g.e3 = g.clearance - margin;
  if (cone_radius + margin < surface) {
    g.los_case = LosCase::kSeparated;
  } else if (cone_radius > surface) {
    g.los_case = LosCase::kPenetrating;
  } else {
    g.los_case = LosCase::kWithinMargin;
  }
  g.p1_interior = proj.t > 0.0 && proj.t < 1.0;
  return g;
}

// Distance from (x, y) to segment (x0, y0)-(x1, y1) in the meridian plane.
double segment_distance_2d(double x, double y, double x0, double y0, double x1, double y1) {
  const double dx = x1 - x0, dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x - (x0 + t * dx), y - (y0 + t * dy));
}

}  // namespace

Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& c) {
  return project_on_segment(a, b, c).point;
}

LosGeometry los_geometry(const Vec3& aux, const Vec3& main, const Obstacle& obs,
                         double apex_angle, double margin) {
  return build(aux, main, obs, apex_angle, margin, false);
}

LosGeometry los_geometry_tiebreak(const Vec3& aux, const Vec3& main,
                                  const Obstacle& obs, double apex_angle,
                                  double margin) {
  return build(aux, main, obs, apex_angle, margin, true);
}

double e3_error(const LosGeometry& geom, double margin) {
  const double gap = (geom.p3 - geom.p2).norm();
  return geom.los_case == LosCase::kPenetrating ? -gap - margin : gap - margin;
}

bool cone_contains(const ViewCone& cone, const Vec3& p) {
  const Vec3 axis = cone.target - cone.apex;
  const double h = axis.norm();
  const Vec3 a = axis / h;
  const Vec3 v = p - cone.apex;
  const double x = v.dot(a);
  if (x < 0.0 || x > h) return false;
  const double y = (v - x * a).norm();
  return y <= x * std::tan(cone.half_angle());
}

double distance_to_cone(const ViewCone& cone, const Vec3& p) {
  const Vec3 axis = cone.target - cone.apex;
  const double h = axis.norm();
  const Vec3 a = axis / h;
  const Vec3 v = p - cone.apex;
  const double x = v.dot(a);
  const double y = (v - x * a).norm();
  const double slope = std::tan(cone.half_angle());
  if (x >= 0.0 && x <= h && y <= x * slope) return 0.0;
  // The solid is a surface of revolution, so the distance equals the planar
  // distance to its meridian triangle (apex, base center, base rim).
  const double rim = h * slope;
  return std::min({segment_distance_2d(x, y, 0.0, 0.0, h, rim),
                   segment_distance_2d(x, y, h, 0.0, h, rim),
                   segment_distance_2d(x, y, 0.0, 0.0, h, 0.0)});
}

double cone_sphere_gap(const ViewCone& cone, const Obstacle& obs) {
  return distance_to_cone(cone, obs.center) - obs.radius;
}

bool occludes(const ViewCone& cone, const Obstacle& obs) {
  return cone_sphere_gap(cone, obs) <= 0.0;
}

double fov_obstacle_intersection_volume(const ViewCone& cone, const Obstacle& obs,
                                        double voxels_per_meter) {
  if (!occludes(cone, obs)) return 0.0;

  const double r = obs.radius;
  const int n = std::max(1, static_cast<int>(std::ceil(2.0 * r * voxels_per_meter)));
  const double edge = 2.0 * r / n;
  const Vec3 origin = obs.center - Vec3::Constant(r);

  const Vec3 axis = cone.target - cone.apex;
  const double h = axis.norm();
  const Vec3 a = axis / h;
  const double slope = std::tan(cone.half_angle());
  const double r2 = r * r;

  long long count = 0;
  for (int i = 0; i < n; ++i) {
    const double x = origin.x() + (i + 0.5) * edge;
    const double dx = x - obs.center.x();
    for (int j = 0; j < n; ++j) {
      const double y = origin.y() + (j + 0.5) * edge;
      const double dy = y - obs.center.y();
      const double rest = r2 - dx * dx - dy * dy;
      if (rest < 0.0) continue;
      for (int k = 0; k < n; ++k) {
        const double z = origin.z() + (k + 0.5) * edge;
        const double dz = z - obs.center.z();
        if (dz * dz > rest) continue;
        const Vec3 v = Vec3(x, y, z) - cone.apex;
        const double along = v.dot(a);
        if (along < 0.0 || along > h) continue;
        if ((v - along * a).squaredNorm() <= along * along * slope * slope) ++count;
      }
    }
  }
  return static_cast<double>(count) * edge * edge * edge;
}

}  // namespace thcsim
