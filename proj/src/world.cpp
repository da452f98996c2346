#include "sensaptic/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

constexpr double kAngleEps = 1e-12;

Vec2 sub(Vec2 p, Vec2 q) { return {p.x - q.x, p.y - q.y}; }
double dot(Vec2 p, Vec2 q) { return p.x * q.x + p.y * q.y; }
double cross(Vec2 p, Vec2 q) { return p.x * q.y - p.y * q.x; }
double norm(Vec2 p) { return std::hypot(p.x, p.y); }

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Points coincident with the origin count as inside the cone.
bool inside_cone(Vec2 rel, double heading, double half_angle) {
  if (rel.x == 0.0 && rel.y == 0.0) {
    return true;
  }
  const double off = wrap_angle(std::atan2(rel.y, rel.x) - heading);
  return std::abs(off) <= half_angle + kAngleEps;
}

}  // namespace

void WorldModel::validate() const {
  if (!(bounds.x_min < bounds.x_max) || !(bounds.y_min < bounds.y_max)) {
    throw ConfigError("world.bounds", "bounds must have positive extent");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& s = obstacles[i];
    const std::string path = "world.segments[" + std::to_string(i) + "]";
    if (!finite(s.a) || !finite(s.b)) {
      throw ConfigError(path, "coordinates must be finite");
    }
    if (s.a.x == s.b.x && s.a.y == s.b.y) {
      throw ConfigError(path, "segment has zero length");
    }
    if (!bounds.contains(s.a) || !bounds.contains(s.b)) {
      throw ConfigError(path, "segment lies outside world bounds");
    }
  }
}

void UltrasonicParams::validate() const {
  if (!(range_min > 0.0) || !(range_min < range_max)) {
    throw ConfigError("ultrasonic.range_min", "need 0 < range_min < range_max");
  }
  if (!(half_angle > 0.0) || !(half_angle < std::numbers::pi / 2.0)) {
    throw ConfigError("ultrasonic.half_angle", "need 0 < half_angle < pi/2");
  }
  if (!(resolution > 0.0)) {
    throw ConfigError("ultrasonic.resolution", "must be positive");
  }
  if (!(period > 0.0)) {
    throw ConfigError("ultrasonic.period", "must be positive");
  }
}

double ray_segment_distance(Vec2 origin, double theta, const Segment& segment) {
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  const Vec2 edge = sub(segment.b, segment.a);
  const double denom = cross(dir, edge);
  if (std::abs(denom) < 1e-15) {
    return -1.0;
  }
  const Vec2 to_a = sub(segment.a, origin);
  const double s = cross(to_a, edge) / denom;
  const double u = cross(to_a, dir) / denom;
  if (s < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) {
    return -1.0;
  }
  return s;
}

double nearest_in_cone(Vec2 origin, double heading, double half_angle, const WorldModel& world) {
  // The cone is convex, so its intersection with a segment is a sub-segment
  // and the distance to the origin is convex along it. The minimum is at
  // the perpendicular foot or at a sub-segment end, which is either a
  // segment endpoint or a cone-edge crossing.
  double best = std::numeric_limits<double>::infinity();
  const double edges[2] = {heading - half_angle, heading + half_angle};

  for (const auto& seg : world.obstacles) {
    for (Vec2 end : {seg.a, seg.b}) {
      const Vec2 rel = sub(end, origin);
      if (inside_cone(rel, heading, half_angle)) {
        best = std::min(best, norm(rel));
      }
    }

    const Vec2 edge = sub(seg.b, seg.a);
    const double t = dot(sub(origin, seg.a), edge) / dot(edge, edge);
    if (t > 0.0 && t < 1.0) {
      const Vec2 foot{seg.a.x + t * edge.x, seg.a.y + t * edge.y};
      const Vec2 rel = sub(foot, origin);
      if (inside_cone(rel, heading, half_angle)) {
        best = std::min(best, norm(rel));
      }
    }

    for (double theta : edges) {
      const double d = ray_segment_distance(origin, theta, seg);
      if (d >= 0.0) {
        best = std::min(best, d);
      }
    }
  }
  return best;
}

double quantize_and_clamp(double distance_mm, const UltrasonicParams& params) {
  double q = distance_mm;
  if (std::isfinite(q)) {
    q = std::round(q / params.resolution) * params.resolution;
  }
  return std::clamp(q, params.range_min, params.range_max);
}

double raycast_cone(Vec2 origin, double heading, const UltrasonicParams& params,
                    const WorldModel& world) {
  if (!finite(origin) || !world.bounds.contains(origin)) {
    throw DomainError("sensor origin outside world bounds");
  }
  const double metres = nearest_in_cone(origin, heading, params.half_angle, world);
  return quantize_and_clamp(metres * 1000.0, params);
}

}  // namespace sensaptic
