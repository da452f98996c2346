#include "sensaptic/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "sensaptic/errors.hpp"

namespace sensaptic {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Reads fields out of one JSON object and rejects keys nobody asked for,
// so a misspelt field fails loudly instead of silently keeping a default.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
    }
  }

  void degrees(const std::string& key, double& out_radians) {
    double deg = out_radians / kDegToRad;
    number(key, deg);
    out_radians = deg * kDegToRad;
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(field(it.key()), "unknown field");
      }
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_object(ObjectReader& parent, const std::string& key, Fn&& fn) {
  if (const json* v = parent.find(key)) {
    ObjectReader child(*v, parent.field(key));
    fn(child);
    child.finish();
  }
}

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  return v;
}

void parse_world(const json& doc, const std::string& path, WorldModel& world) {
  ObjectReader r(doc, path);
  if (const json* b = r.find("bounds")) {
    require_array(*b, r.field("bounds"));
    if (b->size() != 4) throw ConfigError(r.field("bounds"), "expected [x_min, y_min, x_max, y_max]");
    for (const auto& v : *b) {
      if (!v.is_number()) throw ConfigError(r.field("bounds"), "expected numbers");
    }
    world.bounds = {(*b)[0].get<double>(), (*b)[1].get<double>(), (*b)[2].get<double>(),
                    (*b)[3].get<double>()};
  }
  if (const json* segs = r.find("segments")) {
    require_array(*segs, r.field("segments"));
    world.obstacles.clear();
    for (std::size_t i = 0; i < segs->size(); ++i) {
      const auto& s = (*segs)[i];
      const std::string sp = r.field("segments") + "[" + std::to_string(i) + "]";
      if (!s.is_array() || s.size() != 4) throw ConfigError(sp, "expected [x1, y1, x2, y2]");
      for (const auto& v : s) {
        if (!v.is_number()) throw ConfigError(sp, "expected numbers");
      }
      world.obstacles.push_back({{s[0].get<double>(), s[1].get<double>()},
                                 {s[2].get<double>(), s[3].get<double>()}});
    }
  }
  r.finish();
}

bool is_multiple(double value, double step) {
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) < 1e-6;
}

}  // namespace

std::uint64_t ScenarioConfig::tick_count() const {
  return static_cast<std::uint64_t>(std::llround(duration / dt));
}

void ScenarioConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (!(duration > 0.0)) throw ConfigError("duration", "must be positive");
  if (!is_multiple(duration, dt)) throw ConfigError("duration", "must be a whole number of ticks");
  if (!(record_interval >= dt) || !is_multiple(record_interval, dt)) {
    throw ConfigError("record_interval", "must be a positive whole number of ticks");
  }
  if (!(settle_band > 0.0 && settle_band < 1.0)) throw ConfigError("settle_band", "must be in (0, 1)");

  plate.validate();
  if (!(dt < plate.time_constant())) {
    throw ConfigError("dt", "must be shorter than the plate's R_leak*C time constant");
  }

  if (!(calibration.threshold > 0.0)) throw ConfigError("master.threshold", "must be positive");
  if (!(calibration.v_full_scale > 0.0)) throw ConfigError("master.v_full_scale", "must be positive");
  if (!(full_scale_force > 0.0)) throw ConfigError("master.full_scale_force", "must be positive");
  if (!(impulse_width >= dt)) throw ConfigError("master.impulse_width", "must be at least one tick");
  if (!(calibration.v_ref_max > 0.0)) throw ConfigError("master.v_ref_max", "must be positive");
  if (!(calibration.hold_timeout > 0.0)) throw ConfigError("master.hold_timeout", "must be positive");
  if (!(calibration.refractory >= 0.0)) throw ConfigError("master.refractory", "must be >= 0");
  if (!(calibration.heartbeat_period > 0.0)) {
    throw ConfigError("master.heartbeat_period", "must be positive");
  }
  if (!(threat.d_min < threat.d_safe)) throw ConfigError("master.d_min", "must be below master.d_safe");
  if (!(threat.f_min > 0.0)) throw ConfigError("master.f_min", "must be positive");
  if (!(threat.f_min < threat.f_max)) throw ConfigError("master.f_min", "must be below master.f_max");
  if (!(threat.f_max < plate.free_resonance_hz)) {
    throw ConfigError("master.f_max", "must be below plate.free_resonance_hz");
  }
  if (!(threat.feedback_period > 0.0)) throw ConfigError("master.feedback_period", "must be positive");

  gains.validate();
  motor.validate();
  ultrasonic.validate();
  channel.validate();
  world.validate();
  if (!world.bounds.contains({start.x, start.y})) {
    throw ConfigError("start", "start pose outside world bounds");
  }
  if (!(max_turn_rate >= 0.0)) throw ConfigError("max_turn_rate", "must be >= 0");

  for (std::size_t i = 0; i < script.size(); ++i) {
    const std::string path = "script[" + std::to_string(i) + "]";
    if (!(script[i].t >= 0.0 && script[i].t <= duration)) {
      throw ConfigError(path + ".t", "must lie within [0, duration]");
    }
    if (!(script[i].width >= dt)) throw ConfigError(path + ".width", "must be at least one tick");
  }
  for (std::size_t i = 0; i < reference_steps.size(); ++i) {
    if (!(reference_steps[i].t >= 0.0 && reference_steps[i].t <= duration)) {
      throw ConfigError("reference_steps[" + std::to_string(i) + "].t",
                        "must lie within [0, duration]");
    }
  }
  if (!(live.telemetry_hz > 0.0)) throw ConfigError("live.telemetry_hz", "must be positive");
}

double impulse_peak_voltage(const PiezoPlateParams& plate, double force, double width, double dt) {
  const VoltageTrace trace = simulate_sense(make_impulse(force, width, dt, width), plate, dt);
  double peak = 0.0;
  for (double v : trace.volts) {
    peak = std::max(peak, std::abs(v));
  }
  return peak;
}

void finalize(ScenarioConfig& config) {
  if (config.auto_full_scale) {
    config.plate.validate();
    if (!(config.dt > 0.0) || !(config.dt < config.plate.time_constant())) {
      throw ConfigError("dt", "must be positive and shorter than the plate's R_leak*C time constant");
    }
    if (!(config.impulse_width >= config.dt) || !(config.full_scale_force > 0.0)) {
      throw ConfigError("master.impulse_width", "cannot derive v_full_scale from this impulse");
    }
    config.calibration.v_full_scale =
        impulse_peak_voltage(config.plate, config.full_scale_force, config.impulse_width, config.dt);
  }
}

ScenarioConfig parse_scenario(const json& doc) {
  ScenarioConfig c;
  ObjectReader root(doc, "");

  std::string mode = "scripted";
  root.string("mode", mode);
  if (mode == "scripted") {
    c.mode = RunMode::kScripted;
  } else if (mode == "live") {
    c.mode = RunMode::kLive;
  } else {
    throw ConfigError("mode", "expected \"scripted\" or \"live\"");
  }
  root.number("dt", c.dt);
  root.number("duration", c.duration);
  root.number("record_interval", c.record_interval);
  root.number("settle_band", c.settle_band);
  root.number("max_turn_rate", c.max_turn_rate);

  with_object(root, "plate", [&](ObjectReader& r) {
    r.number("d33", c.plate.d33);
    r.number("capacitance", c.plate.capacitance);
    r.number("leak_resistance", c.plate.leak_resistance);
    r.number("max_drive_voltage", c.plate.max_drive_voltage);
    r.number("free_resonance_hz", c.plate.free_resonance_hz);
  });

  with_object(root, "master", [&](ObjectReader& r) {
    r.number("threshold", c.calibration.threshold);
    if (const json* v = r.find("v_full_scale")) {
      if (v->is_string() && v->get<std::string>() == "auto") {
        c.auto_full_scale = true;
      } else if (v->is_number()) {
        c.auto_full_scale = false;
        c.calibration.v_full_scale = v->get<double>();
      } else {
        throw ConfigError(r.field("v_full_scale"), "expected a number or \"auto\"");
      }
    }
    r.number("full_scale_force", c.full_scale_force);
    r.number("impulse_width", c.impulse_width);
    r.number("v_ref_max", c.calibration.v_ref_max);
    r.number("hold_timeout", c.calibration.hold_timeout);
    r.number("refractory", c.calibration.refractory);
    r.number("heartbeat_period", c.calibration.heartbeat_period);
    r.number("d_min", c.threat.d_min);
    r.number("d_safe", c.threat.d_safe);
    r.number("f_min", c.threat.f_min);
    r.number("f_max", c.threat.f_max);
    r.number("feedback_period", c.threat.feedback_period);
  });

  with_object(root, "gains", [&](ObjectReader& r) {
    r.number("kp", c.gains.kp);
    r.number("kd", c.gains.kd);
  });

  with_object(root, "motor", [&](ObjectReader& r) {
    r.number("v_max", c.motor.v_max);
    r.number("tau", c.motor.tau);
  });

  with_object(root, "ultrasonic", [&](ObjectReader& r) {
    r.number("range_min", c.ultrasonic.range_min);
    r.number("range_max", c.ultrasonic.range_max);
    r.degrees("half_angle_deg", c.ultrasonic.half_angle);
    r.number("resolution", c.ultrasonic.resolution);
    r.number("period", c.ultrasonic.period);
  });

  with_object(root, "channel", [&](ObjectReader& r) {
    r.number("base_latency", c.channel.base_latency);
    r.number("jitter_max", c.channel.jitter_max);
    r.number("drop_prob", c.channel.drop_prob);
    r.unsigned64("seed", c.channel.seed);
  });

  if (const json* w = root.find("world")) {
    parse_world(*w, "world", c.world);
  }

  with_object(root, "start", [&](ObjectReader& r) {
    r.number("x", c.start.x);
    r.number("y", c.start.y);
    r.degrees("heading_deg", c.start.heading);
  });

  if (const json* s = root.find("script")) {
    require_array(*s, "script");
    for (std::size_t i = 0; i < s->size(); ++i) {
      ObjectReader r((*s)[i], "script[" + std::to_string(i) + "]");
      OperatorImpulse imp{0.0, 0.0, c.impulse_width};
      r.number("t", imp.t);
      r.number("force", imp.force);
      r.number("width", imp.width);
      r.finish();
      c.script.push_back(imp);
    }
  }

  if (const json* s = root.find("reference_steps")) {
    require_array(*s, "reference_steps");
    for (std::size_t i = 0; i < s->size(); ++i) {
      ObjectReader r((*s)[i], "reference_steps[" + std::to_string(i) + "]");
      ReferenceStep step{0.0, 0.0};
      r.number("t", step.t);
      r.number("position", step.position);
      r.finish();
      c.reference_steps.push_back(step);
    }
  }

  with_object(root, "live", [&](ObjectReader& r) {
    r.number("telemetry_hz", c.live.telemetry_hz);
    r.string("assets_dir", c.live.assets_dir);
  });

  root.finish();
  finalize(c);
  c.validate();
  return c;
}

ScenarioConfig default_scenario() { return parse_scenario(json::object()); }

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string(), "cannot open scenario file");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  ScenarioConfig config = parse_scenario(doc);
  // Relative asset paths resolve against the scenario file.
  if (!config.live.assets_dir.empty() && std::filesystem::path(config.live.assets_dir).is_relative()) {
    config.live.assets_dir = (path.parent_path() / config.live.assets_dir).string();
  }
  return config;
}

json scenario_to_json(const ScenarioConfig& c) {
  json segments = json::array();
  for (const auto& s : c.world.obstacles) {
    segments.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  }
  json script = json::array();
  for (const auto& imp : c.script) {
    script.push_back({{"t", imp.t}, {"force", imp.force}, {"width", imp.width}});
  }
  json steps = json::array();
  for (const auto& s : c.reference_steps) {
    steps.push_back({{"t", s.t}, {"position", s.position}});
  }
  return {
      {"mode", c.mode == RunMode::kScripted ? "scripted" : "live"},
      {"dt", c.dt},
      {"duration", c.duration},
      {"record_interval", c.record_interval},
      {"settle_band", c.settle_band},
      {"max_turn_rate", c.max_turn_rate},
      {"plate",
       {{"d33", c.plate.d33},
        {"capacitance", c.plate.capacitance},
        {"leak_resistance", c.plate.leak_resistance},
        {"max_drive_voltage", c.plate.max_drive_voltage},
        {"free_resonance_hz", c.plate.free_resonance_hz}}},
      {"master",
       {{"threshold", c.calibration.threshold},
        {"v_full_scale", c.calibration.v_full_scale},
        {"full_scale_force", c.full_scale_force},
        {"impulse_width", c.impulse_width},
        {"v_ref_max", c.calibration.v_ref_max},
        {"hold_timeout", c.calibration.hold_timeout},
        {"refractory", c.calibration.refractory},
        {"heartbeat_period", c.calibration.heartbeat_period},
        {"d_min", c.threat.d_min},
        {"d_safe", c.threat.d_safe},
        {"f_min", c.threat.f_min},
        {"f_max", c.threat.f_max},
        {"feedback_period", c.threat.feedback_period}}},
      {"gains", {{"kp", c.gains.kp}, {"kd", c.gains.kd}}},
      {"motor", {{"v_max", c.motor.v_max}, {"tau", c.motor.tau}}},
      {"ultrasonic",
       {{"range_min", c.ultrasonic.range_min},
        {"range_max", c.ultrasonic.range_max},
        {"half_angle_deg", c.ultrasonic.half_angle / kDegToRad},
        {"resolution", c.ultrasonic.resolution},
        {"period", c.ultrasonic.period}}},
      {"channel",
       {{"base_latency", c.channel.base_latency},
        {"jitter_max", c.channel.jitter_max},
        {"drop_prob", c.channel.drop_prob},
        {"seed", c.channel.seed}}},
      {"world",
       {{"bounds", {c.world.bounds.x_min, c.world.bounds.y_min, c.world.bounds.x_max, c.world.bounds.y_max}},
        {"segments", segments}}},
      {"start", {{"x", c.start.x}, {"y", c.start.y}, {"heading_deg", c.start.heading / kDegToRad}}},
      {"script", script},
      {"reference_steps", steps},
      {"live", {{"telemetry_hz", c.live.telemetry_hz}, {"assets_dir", c.live.assets_dir}}},
  };
}

}  // namespace sensaptic
