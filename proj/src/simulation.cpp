#include "sensaptic/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

MasterConfig master_config(const ScenarioConfig& c) {
  return MasterConfig{c.calibration, c.threat, c.plate};
}

SlaveConfig slave_config(const ScenarioConfig& c) {
  SlaveConfig s;
  s.gains = c.gains;
  s.motor = c.motor;
  s.ultrasonic = c.ultrasonic;
  s.v_ref_max = c.calibration.v_ref_max;
  s.hold_timeout = c.calibration.hold_timeout;
  s.max_turn_rate = c.max_turn_rate;
  return s;
}

UgvState initial_state(const ScenarioConfig& c) {
  UgvState s;
  s.pose = {c.start.x, c.start.y};
  s.heading = c.start.heading;
  return s;
}

const ScenarioConfig& validated(const ScenarioConfig& c) {
  c.validate();
  return c;
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& config, bool record_series)
    : config_(validated(config)),
      record_series_(record_series),
      master_(master_config(config_), config_.dt),
      slave_(slave_config(config_), config_.world, initial_state(config_), config_.dt),
      channel_(config_.channel),
      record_every_(static_cast<std::uint64_t>(std::llround(config_.record_interval / config_.dt))),
      script_(config_.script) {
  std::stable_sort(script_.begin(), script_.end(),
                   [](const OperatorImpulse& a, const OperatorImpulse& b) { return a.t < b.t; });
  std::stable_sort(config_.reference_steps.begin(), config_.reference_steps.end(),
                   [](const ReferenceStep& a, const ReferenceStep& b) { return a.t < b.t; });
  if (record_series_) {
    series_.reserve(static_cast<std::size_t>(config_.tick_count() / record_every_ + 1));
  }
}

void Simulation::inject_impulse(double magnitude) {
  magnitude = std::clamp(magnitude, -1.0, 1.0);
  active_.push_back({tick_, magnitude * config_.full_scale_force, config_.impulse_width});
}

void Simulation::set_turn(double omega) { slave_.set_turn(std::clamp(omega, -1.0, 1.0)); }

std::vector<Message> Simulation::receive(Direction d, double now) {
  std::vector<Message> messages;
  for (auto& delivery : channel_.link(d).release(now)) {
    try {
      messages.push_back(decode_frame(delivery.frame));
    } catch (const IntegrityError&) {
      ++counters_.integrity_errors;
      ++counters_.decode_failures;
    } catch (const Error&) {
      ++counters_.decode_failures;
    }
  }
  return messages;
}

void Simulation::send(Direction d, const std::vector<Message>& messages, double now) {
  for (const auto& message : messages) {
    Bytes frame = encode_frame(message);
    if (observer_) {
      observer_({tick_, d, message_type(message), message_seq(message), frame});
    }
    channel_.link(d).submit(std::move(frame), now);
  }
}

double Simulation::operator_force() {
  while (next_script_ < script_.size()) {
    const auto start = static_cast<std::uint64_t>(std::llround(script_[next_script_].t / config_.dt));
    if (start > tick_) break;
    active_.push_back({start, script_[next_script_].force, script_[next_script_].width});
    ++next_script_;
  }
  double force = 0.0;
  for (const auto& imp : active_) {
    const double offset = static_cast<double>(tick_ - imp.start_tick) * config_.dt;
    force += impulse_force(imp.force, imp.width, offset);
  }
  std::erase_if(active_, [&](const ActiveImpulse& imp) {
    return static_cast<double>(tick_ - imp.start_tick) * config_.dt >= imp.width;
  });
  return force;
}

void Simulation::apply_reference_steps(double now) {
  const auto& steps = config_.reference_steps;
  if (steps.empty()) return;
  while (next_step_ < steps.size() && steps[next_step_].t <= now + 1e-12) {
    ++next_step_;
  }
  const double ref = next_step_ == 0 ? 0.0 : steps[next_step_ - 1].position;
  master_.set_reference(ref);
  slave_.set_reference_override(ref);
}

void Simulation::step() {
  const auto wall_start = std::chrono::steady_clock::now();
  const double now = this->now();

  const auto to_master = receive(Direction::kSlaveToMaster, now);
  const auto to_slave = receive(Direction::kMasterToSlave, now);

  const double force = operator_force();
  const MasterOutput m = master_.step(now, force, to_master);
  apply_reference_steps(now);
  if (m.pulse_command) {
    ++counters_.pulses_detected;
    pulse_tick_[m.pulse_command->seq] = tick_;
    pulse_wall_start_[m.pulse_command->seq] = wall_total_;
  }
  for (const auto& msg : m.sent) {
    if (std::holds_alternative<DriveCommand>(msg)) ++counters_.commands_sent;
  }
  send(Direction::kMasterToSlave, m.sent, now);

  const SlaveOutput s = slave_.step(now, to_slave);
  for (const auto& [report_seq, command_seq] : s.triggered_reports) {
    report_command_[report_seq] = command_seq;
  }
  send(Direction::kSlaveToMaster, s.sent, now);

  if (record_series_ && tick_ % record_every_ == 0) {
    const Snapshot snap = snapshot();
    series_.push_back({snap.t, snap.ref_pos, snap.slave_pos, snap.motor_drive, snap.distance_mm,
                       snap.haptic_hz});
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  wall_total_ += elapsed;

  if (m.haptic) {
    ++counters_.haptic_events;
    auto cmd = report_command_.find(m.haptic->report_seq);
    if (cmd != report_command_.end()) {
      auto detected = pulse_tick_.find(cmd->second);
      if (detected != pulse_tick_.end()) {
        const std::uint64_t ticks = tick_ - detected->second;
        latencies_.push_back({cmd->second, detected->second, tick_,
                              static_cast<double>(ticks) * config_.dt,
                              wall_total_ - pulse_wall_start_[cmd->second]});
        pulse_tick_.erase(detected);
        pulse_wall_start_.erase(cmd->second);
      }
      report_command_.erase(cmd);
    }
  }
  counters_.acks_received = master_.acks_received();
  ++tick_;
}

void Simulation::run_to_end() {
  const std::uint64_t total = config_.tick_count();
  while (tick_ < total) {
    step();
  }
}

Snapshot Simulation::snapshot() const {
  Snapshot s;
  s.t = now();
  s.ref_pos = master_.reference().ref_position;
  const UgvState& ugv = slave_.state();
  s.slave_pos = ugv.position;
  s.slave_velocity = ugv.velocity;
  s.motor_drive = ugv.motor_drive;
  s.distance_mm = master_.last_distance_mm() ? static_cast<double>(*master_.last_distance_mm())
                                             : config_.ultrasonic.range_max;
  s.haptic_hz = master_.haptic_hz();
  s.haptic_active = master_.haptic_active();
  s.command_direction = master_.active_command().direction;
  s.command_speed = master_.active_command().speed_level;
  s.heading = ugv.heading;
  s.pose = ugv.pose;
  s.channel = channel_.totals();
  return s;
}

}  // namespace sensaptic
