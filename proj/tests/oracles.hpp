#pragma once

// Reference computations used only by tests. Each one follows a different
// route from the production code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "sensaptic/world.hpp"

namespace oracle {

// Bit-serial CRC-8, poly 0x07, init 0.
inline std::uint8_t crc8_bitwise(const std::vector<std::uint8_t>& data) {
  std::uint8_t crc = 0;
  for (auto byte : data) {
    crc ^= byte;
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<std::uint8_t>(crc << 1);
    }
  }
  return crc;
}

// Frame assembled field by field.
inline std::vector<std::uint8_t> build_frame(std::uint8_t type, std::uint16_t seq,
                                             const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> body{type, static_cast<std::uint8_t>(seq & 0xFF),
                                 static_cast<std::uint8_t>(seq >> 8),
                                 static_cast<std::uint8_t>(payload.size())};
  body.insert(body.end(), payload.begin(), payload.end());
  std::vector<std::uint8_t> frame(body.size() + 2);
  frame[0] = 0xA5;
  std::copy(body.begin(), body.end(), frame.begin() + 1);
  frame.back() = crc8_bitwise(body);
  return frame;
}

// Brute-force cone range: rays every `angle_step` rad across the cone
// (both edges included), each marched in `march_step` metre increments
// until it crosses an obstacle. Returns metres, +inf when nothing is hit
// within `max_range`.
inline double raymarch_cone(sensaptic::Vec2 origin, double heading, double half_angle,
                            const sensaptic::WorldModel& world, double max_range,
                            double angle_step = 1e-3, double march_step = 1e-4) {
  double best = std::numeric_limits<double>::infinity();
  const int rays = static_cast<int>(std::ceil(2.0 * half_angle / angle_step));
  for (int r = 0; r <= rays; ++r) {
    const double theta = heading - half_angle + 2.0 * half_angle * r / rays;
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    const double limit = std::min(best, max_range);
    const auto steps = static_cast<long>(limit / march_step) + 1;

    // Side-of-line value for each obstacle at the previous march point.
    std::vector<double> side(world.obstacles.size());
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
      const auto& s = world.obstacles[i];
      side[i] = (s.b.x - s.a.x) * (origin.y - s.a.y) - (s.b.y - s.a.y) * (origin.x - s.a.x);
    }
    for (long k = 1; k <= steps; ++k) {
      const double px = origin.x + dx * march_step * static_cast<double>(k);
      const double py = origin.y + dy * march_step * static_cast<double>(k);
      bool hit = false;
      for (std::size_t i = 0; i < world.obstacles.size() && !hit; ++i) {
        const auto& s = world.obstacles[i];
        const double ex = s.b.x - s.a.x;
        const double ey = s.b.y - s.a.y;
        const double now = ex * (py - s.a.y) - ey * (px - s.a.x);
        if ((now <= 0.0) != (side[i] <= 0.0) || now == 0.0) {
          // Crossed the line; accept if the crossing lies on the segment.
          const double t = ((px - s.a.x) * ex + (py - s.a.y) * ey) / (ex * ex + ey * ey);
          if (t >= -1e-3 && t <= 1.0 + 1e-3) hit = true;
        }
        side[i] = now;
      }
      if (hit) {
        best = std::min(best, march_step * static_cast<double>(k));
        break;
      }
    }
  }
  return best;
}

inline double quantize_clamp_mm(double metres, double resolution, double lo, double hi) {
  double mm = metres * 1000.0;
  if (std::isfinite(mm)) mm = std::round(mm / resolution) * resolution;
  return std::clamp(mm, lo, hi);
}

struct RandomScene {
  sensaptic::WorldModel world;
  sensaptic::Vec2 origin;
  double heading;
};

// Arena walls on the bounds plus a handful of rotated boxes, none of which
// contains the sensor origin.
inline RandomScene random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> size(0.1, 0.8);
  std::uniform_int_distribution<int> count(1, 6);

  RandomScene scene;
  auto& w = scene.world;
  w.bounds = {-5.0, -5.0, 5.0, 5.0};
  w.obstacles = {{{-5, -5}, {5, -5}}, {{5, -5}, {5, 5}}, {{5, 5}, {-5, 5}}, {{-5, 5}, {-5, -5}}};
  scene.origin = {pos(rng), pos(rng)};
  scene.heading = angle(rng);

  const int boxes = count(rng);
  for (int b = 0; b < boxes; ++b) {
    const double hx = size(rng) / 2.0;
    const double hy = size(rng) / 2.0;
    // Put most boxes roughly ahead so the cone actually sees them.
    std::uniform_real_distribution<double> range(0.2 + std::hypot(hx, hy), 3.5);
    std::uniform_real_distribution<double> spread(-0.3, 0.3);
    const double dist = range(rng);
    const double dir = scene.heading + spread(rng);
    const double cx = std::clamp(scene.origin.x + dist * std::cos(dir), -4.0, 4.0);
    const double cy = std::clamp(scene.origin.y + dist * std::sin(dir), -4.0, 4.0);
    if (std::hypot(cx - scene.origin.x, cy - scene.origin.y) < std::hypot(hx, hy) + 0.05) continue;
    const double rot = angle(rng);
    const double c = std::cos(rot);
    const double s = std::sin(rot);
    sensaptic::Vec2 corners[4];
    const double sx[4] = {-hx, hx, hx, -hx};
    const double sy[4] = {-hy, -hy, hy, hy};
    for (int i = 0; i < 4; ++i) {
      corners[i] = {cx + c * sx[i] - s * sy[i], cy + s * sx[i] + c * sy[i]};
    }
    for (int i = 0; i < 4; ++i) {
      w.obstacles.push_back({corners[i], corners[(i + 1) % 4]});
    }
  }
  return scene;
}

// Closed-form first-order step response from rest.
inline double first_order_velocity(double v_max, double tau, double t) {
  return v_max * (1.0 - std::exp(-t / tau));
}

}  // namespace oracle
