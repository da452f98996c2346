#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sensaptic/errors.hpp"
#include "sensaptic/metrics.hpp"
#include "sensaptic/simulation.hpp"

using namespace sensaptic;
using nlohmann::json;

namespace {

ScenarioConfig short_run(double duration) {
  ScenarioConfig c = default_scenario();
  c.duration = duration;
  return c;
}

ScenarioConfig wall_approach() {
  ScenarioConfig c = short_run(6.0);
  c.world.obstacles = {{{1.005, -1.0}, {1.005, 1.0}}};
  for (double t : {0.1, 0.7, 1.3, 1.9}) c.script.push_back({t, 10.0, c.impulse_width});
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("empty script: reference and vehicle stay at rest") {
  const RunMetrics m = run_scenario(short_run(2.0));
  REQUIRE_FALSE(m.series.empty());
  for (const auto& s : m.series) {
    CHECK(s.ref_pos == 0.0);
    CHECK(s.slave_pos == 0.0);
    CHECK(s.haptic_hz == 50.0);
  }
  CHECK(m.rmse == 0.0);
  CHECK(m.counters.pulses_detected == 0);
  CHECK(m.counters.haptic_events == 0);
  CHECK(m.latencies.empty());
  // Heartbeats every 0.1 s, each acknowledged.
  CHECK(m.counters.acks_received == 20);
}

TEST_CASE("single impulse converges to the hand-integrated reference") {
  ScenarioConfig c = short_run(4.0);
  c.script = {{0.1, 10.0, c.impulse_width}};
  Simulation sim(c);
  sim.run_to_end();
  // Full-scale press: v_ref_max for hold_timeout.
  const double expected = 0.5 * 0.5;
  CHECK(sim.snapshot().ref_pos == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(sim.snapshot().slave_pos - expected) < 0.005);
  CHECK(sim.counters().pulses_detected == 1);
  // Empty world: the sensor reads range_max, nothing to feed back.
  CHECK(sim.counters().haptic_events == 0);
  CHECK(sim.snapshot().distance_mm == 4000.0);

  // Half-scale reverse press rounds to speed 128.
  ScenarioConfig r = short_run(2.0);
  r.script = {{0.1, -5.0, r.impulse_width}};
  Simulation rev(r);
  rev.run_to_end();
  CHECK(rev.snapshot().ref_pos == doctest::Approx(-0.5 * 0.5 * 128.0 / 255.0).epsilon(1e-9));
}

TEST_CASE("wall approach: distance never grows and ends at range_min") {
  Simulation sim(wall_approach());
  sim.run_to_end();
  const auto& series = sim.series();
  double last = 1e9;
  for (const auto& s : series) {
    CHECK(s.distance_mm <= last);
    last = s.distance_mm;
  }
  CHECK(last == 20.0);
  CHECK(sim.snapshot().haptic_hz == doctest::Approx(300.0));
  CHECK(sim.counters().haptic_events > 0);
  // The first press starts at 1005 mm, beyond d_safe: no haptic, no sample.
  CHECK(sim.latencies().size() == 3);
}

TEST_CASE("identical seeds give byte-identical metrics") {
  ScenarioConfig c = wall_approach();
  c.channel.drop_prob = 0.3;
  c.channel.jitter_max = 0.002;
  c.channel.base_latency = 0.001;
  c.channel.seed = 1234;
  const RunMetrics a = run_scenario(c);
  const RunMetrics b = run_scenario(c);
  CHECK(format_series_csv(a.series) == format_series_csv(b.series));
  CHECK(summary_json(a).dump() == summary_json(b).dump());
  c.channel.seed = 4321;
  CHECK(summary_json(run_scenario(c)).dump() != summary_json(a).dump());
}

TEST_CASE("latency samples are whole ticks and zero-latency loop takes two") {
  ScenarioConfig c = wall_approach();
  const RunMetrics ideal = run_scenario(c);
  REQUIRE(ideal.latencies.size() == 3);
  for (double l : ideal.latencies) CHECK(l == doctest::Approx(2 * c.dt));

  c.channel.base_latency = 0.0003;
  c.channel.jitter_max = 0.0004;
  const RunMetrics lagged = run_scenario(c);
  REQUIRE_FALSE(lagged.latencies.empty());
  for (double l : lagged.latencies) {
    const double ticks = l / c.dt;
    CHECK(std::abs(ticks - std::round(ticks)) < 1e-9);
    CHECK(l >= 2 * c.channel.base_latency);
  }
}

TEST_CASE("tick and frame conservation") {
  ScenarioConfig c = short_run(1.0);
  c.channel.drop_prob = 0.25;
  c.record_interval = 0.002;
  Simulation sim(c);
  std::uint64_t observed = 0;
  sim.set_frame_observer([&](const FrameEvent&) { ++observed; });
  sim.run_to_end();
  CHECK(sim.tick() == c.tick_count());
  CHECK(sim.finished());
  CHECK(sim.series().size() == 500);
  const LinkStats totals = sim.channel().totals();
  CHECK(totals.sent == observed);
  const std::uint64_t in_flight = sim.channel().link(Direction::kMasterToSlave).in_flight() +
                                  sim.channel().link(Direction::kSlaveToMaster).in_flight();
  CHECK(totals.delivered + totals.dropped + in_flight == totals.sent);
}

TEST_CASE("reference steps drive the servo directly") {
  ScenarioConfig c = short_run(4.0);
  c.reference_steps = {{0.5, 1.0}};
  const RunMetrics m = run_scenario(c);
  REQUIRE(m.settling_time.has_value());
  CHECK(*m.settling_time <= 3.0);
  CHECK(m.rmse <= 0.02);
}

TEST_CASE("tracking metric edge cases") {
  std::vector<Sample> s = {{0.0, 0, 0, 0, 0, 0}, {0.1, 1, 0, 0, 0, 0}, {0.2, 1, 1, 0, 0, 0}};
  const Tracking t = tracking_metrics(s, 0.02);
  REQUIRE(t.settling_time.has_value());
  CHECK(*t.settling_time == doctest::Approx(0.1));
  CHECK(t.rmse == 0.0);
  s.push_back({0.3, 1, 0.5, 0, 0, 0});
  CHECK_FALSE(tracking_metrics(s, 0.02).settling_time.has_value());
  CHECK(percentile(std::vector<double>{3, 1, 2}, 0.5) == 2.0);
  CHECK(percentile(std::vector<double>{}, 0.5) == 0.0);
}

TEST_CASE("emit_metrics writes the metrics files") {
  const auto dir = std::filesystem::temp_directory_path() / "sensaptic_emit_test";
  std::filesystem::remove_all(dir);

  RunMetrics empty;
  emit_metrics(empty, dir);
  CHECK(slurp(dir / "timeseries.csv") == "t,ref_pos,slave_pos,motor_drive,distance_mm,haptic_hz\n");

  RunMetrics three;
  three.series = {{0.0, 0.0, 0.0, 0.0, 4000.0, 50.0},
                  {0.001, 0.5, 0.25, -1.0, 20.0, 300.0},
                  {0.002, 0.1, 0.125, 0.5, 1000.0, 175.5}};
  three.settling_time = 1.5;
  three.latencies = {0.0002};
  emit_metrics(three, dir);
  CHECK(slurp(dir / "timeseries.csv") ==
        "t,ref_pos,slave_pos,motor_drive,distance_mm,haptic_hz\n"
        "0,0,0,0,4000,50\n"
        "0.001,0.5,0.25,-1,20,300\n"
        "0.002,0.1,0.125,0.5,1000,175.5\n");
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("settling_time_s") == 1.5);
  CHECK(summary.at("loop_latency_samples_s").size() == 1);
  CHECK(json::parse(slurp(dir / "wallclock.json")).contains("loop_compute_s"));

  // A directory that cannot be created names the path.
  const auto blocked = dir / "timeseries.csv" / "sub";
  try {
    emit_metrics(three, blocked);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(blocked.string()) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_scenario refuses live mode") {
  ScenarioConfig c = short_run(1.0);
  c.mode = RunMode::kLive;
  CHECK_THROWS_AS(run_scenario(c), ConfigError);
}
