#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sensaptic/errors.hpp"
#include "sensaptic/world.hpp"

using namespace sensaptic;

namespace {

WorldModel wall_at(double x) {
  WorldModel w;
  w.obstacles = {{{x, -2.0}, {x, 2.0}}};
  return w;
}

}  // namespace

TEST_CASE("raycast_cone examples") {
  const UltrasonicParams p;
  CHECK(raycast_cone({0, 0}, 0.0, p, WorldModel{}) == 4000.0);

  const double analytic = raycast_cone({0, 0}, 0.0, p, wall_at(0.5));
  const double brute = oracle::quantize_clamp_mm(
      oracle::raymarch_cone({0, 0}, 0.0, p.half_angle, wall_at(0.5), 4.0), 3.0, 20.0, 4000.0);
  CHECK(std::abs(analytic - 500.0) <= 3.0);
  CHECK(std::abs(analytic - brute) <= 3.0);

  CHECK(raycast_cone({0, 0}, 0.0, p, wall_at(-0.5)) == 4000.0);
  CHECK(raycast_cone({0, 0}, std::numbers::pi, p, wall_at(-0.5)) == doctest::Approx(501.0));
  CHECK(raycast_cone({0, 0}, 0.0, p, wall_at(0.001)) == 20.0);
}

TEST_CASE("cone edges and occlusion") {
  const UltrasonicParams p;
  WorldModel w;
  // Post just outside the cone at 1 m.
  const double outside = std::tan(p.half_angle) * 1.0 + 0.01;
  w.obstacles = {{{1.0, outside}, {1.0, outside + 0.2}}};
  CHECK(raycast_cone({0, 0}, 0.0, p, w) == 4000.0);
  // Segment poking into the cone from the side: nearest visible point is on
  // the cone edge.
  w.obstacles = {{{1.0, 0.05}, {1.0, 1.0}}};
  CHECK(std::abs(raycast_cone({0, 0}, 0.0, p, w) - 1001.25) <= 3.0);
  // y = 0.3 - 1.5 (x - 1) recedes from the sensor; only its tail enters the
  // cone, so the nearest visible point is where it crosses the upper edge.
  w.obstacles = {{{1.0, 0.3}, {1.2, 0.0}}};
  const double edge_x = 1.8 / (1.5 + std::tan(p.half_angle));
  const double edge_hit = std::hypot(edge_x, edge_x * std::tan(p.half_angle)) * 1000.0;
  CHECK(std::abs(raycast_cone({0, 0}, 0.0, p, w) - edge_hit) <= 3.0);
  // Far wall hidden behind a near one: the near one wins.
  w.obstacles = {{{2.0, -1.0}, {2.0, 1.0}}, {{0.7, -1.0}, {0.7, 1.0}}};
  CHECK(raycast_cone({0, 0}, 0.0, p, w) == doctest::Approx(699.0));
}

TEST_CASE("raycast_cone rejects an origin outside the bounds") {
  WorldModel w;
  w.bounds = {-1, -1, 1, 1};
  CHECK_THROWS_AS(raycast_cone({2.0, 0.0}, 0.0, UltrasonicParams{}, w), DomainError);
}

TEST_CASE("world and sensor validation") {
  WorldModel w;
  w.obstacles = {{{0, 0}, {0, 0}}};
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w.obstacles = {{{0, 0}, {20, 0}}};
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w.obstacles = {{{0, 0}, {1, 0}}};
  CHECK_NOTHROW(w.validate());

  UltrasonicParams p;
  p.range_min = 5000;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.half_angle = 2.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("property: approaching a wall gives non-increasing readings") {
  const UltrasonicParams p;
  const WorldModel w = wall_at(3.0);
  double last = 1e9;
  for (double x = 0.0; x < 3.0; x += 0.0007) {
    const double d = raycast_cone({x, 0.1}, 0.0, p, w);
    CHECK(d <= last);
    last = d;
  }
  CHECK(last == p.range_min);
}

TEST_CASE("property: analytic cone matches the ray-march oracle on random worlds") {
  const UltrasonicParams p;
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 15; ++trial) {
    const auto scene = oracle::random_scene(rng);
    const double analytic = raycast_cone(scene.origin, scene.heading, p, scene.world);
    const double brute = oracle::quantize_clamp_mm(
        oracle::raymarch_cone(scene.origin, scene.heading, p.half_angle, scene.world,
                              p.range_max / 1000.0),
        p.resolution, p.range_min, p.range_max);
    CHECK_MESSAGE(std::abs(analytic - brute) <= p.resolution, "trial ", trial, " analytic ",
                  analytic, " oracle ", brute);
  }
}
