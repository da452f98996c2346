#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensaptic/channel.hpp"
#include "sensaptic/master.hpp"
#include "sensaptic/piezo.hpp"
#include "sensaptic/slave.hpp"
#include "sensaptic/world.hpp"

namespace sensaptic {

enum class RunMode { kScripted, kLive };

// One timed operator press on the joystick plate.
struct OperatorImpulse {
  double t;      // s, start of the press
  double force;  // N peak, signed
  double width;  // s
};

struct ReferenceStep {
  double t;
  double position;
};

struct StartPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct LiveOptions {
  double telemetry_hz = 30.0;
  std::string assets_dir;  // console static files; empty disables serving
};

struct ScenarioConfig {
  PiezoPlateParams plate;
  Calibration calibration;
  bool auto_full_scale = true;      // derive v_full_scale from the plate model
  double full_scale_force = 10.0;   // N
  double impulse_width = 0.005;     // s
  ThreatMap threat;
  PdGains gains;
  MotorParams motor;
  UltrasonicParams ultrasonic;
  ChannelConfig channel;
  WorldModel world;
  StartPose start;
  double max_turn_rate = 1.0;
  std::vector<OperatorImpulse> script;
  std::vector<ReferenceStep> reference_steps;
  double dt = 1e-4;
  double duration = 10.0;
  double record_interval = 1e-3;
  double settle_band = 0.02;
  RunMode mode = RunMode::kScripted;
  LiveOptions live;

  std::uint64_t tick_count() const;
  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Peak |V| the plate produces for a half-sine press of `force` and `width`.
double impulse_peak_voltage(const PiezoPlateParams& plate, double force, double width, double dt);

// Resolves derived values (auto full scale) after parsing or editing.
void finalize(ScenarioConfig& config);

// Defaults with derived values resolved; equivalent to parsing `{}`.
ScenarioConfig default_scenario();

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

}  // namespace sensaptic
