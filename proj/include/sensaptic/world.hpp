#pragma once

#include <vector>

namespace sensaptic {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Bounds {
  double x_min = -10.0;
  double y_min = -10.0;
  double x_max = 10.0;
  double y_max = 10.0;

  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

// Static obstacle geometry, metres. Immutable once built.
struct WorldModel {
  std::vector<Segment> obstacles;
  Bounds bounds;

  // Throws ConfigError for zero-length, non-finite or out-of-bounds segments.
  void validate() const;
};

struct UltrasonicParams {
  double range_min = 20.0;       // mm
  double range_max = 4000.0;     // mm
  double half_angle = 0.1308996938995747;  // rad (7.5 deg)
  double resolution = 3.0;       // mm
  double period = 0.06;          // s

  void validate() const;
};

// Distance (m) along the ray from `origin` at angle `theta` to `segment`,
// or a negative value when the ray misses.
double ray_segment_distance(Vec2 origin, double theta, const Segment& segment);

// Nearest obstacle distance (mm) inside the sensor cone, quantized to the
// resolution and then clamped to [range_min, range_max]. Throws DomainError
// when origin lies outside the world bounds.
double raycast_cone(Vec2 origin, double heading, const UltrasonicParams& params,
                    const WorldModel& world);

// Unquantized, unclamped cone minimum in metres; +inf when nothing is hit.
double nearest_in_cone(Vec2 origin, double heading, double half_angle, const WorldModel& world);

double quantize_and_clamp(double distance_mm, const UltrasonicParams& params);

}  // namespace sensaptic
