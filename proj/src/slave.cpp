#include "sensaptic/slave.hpp"

#include <algorithm>
#include <cmath>

#include "sensaptic/errors.hpp"

namespace sensaptic {

void PdGains::validate() const {
  if (!(kp > 0.0)) throw ConfigError("gains.kp", "must be positive");
  if (!(kd >= 0.0)) throw ConfigError("gains.kd", "must be non-negative");
}

void MotorParams::validate() const {
  if (!(v_max > 0.0)) throw ConfigError("motor.v_max", "must be positive");
  if (!(tau > 0.0)) throw ConfigError("motor.tau", "must be positive");
}

PdOutput pd_control(double ref_pos, const UgvState& state, double prev_error, const PdGains& gains,
                    double dt) {
  const double error = ref_pos - state.position;
  const double u = gains.kp * error + gains.kd * (error - prev_error) / dt;
  return {std::clamp(u, -1.0, 1.0), error};
}

UgvState ugv_step(const UgvState& state, double motor_drive, const MotorParams& motor, double dt,
                  double turn_rate) {
  UgvState next = state;
  next.motor_drive = std::clamp(motor_drive, -1.0, 1.0);
  next.velocity += dt * (next.motor_drive * motor.v_max - state.velocity) / motor.tau;
  const double ds = dt * next.velocity;
  next.position += ds;
  next.pose.x += ds * std::cos(state.heading);
  next.pose.y += ds * std::sin(state.heading);
  next.heading = state.heading + turn_rate * dt;
  return next;
}

ThreatReport measure_ultrasonic(const UgvState& state, const WorldModel& world,
                                const UltrasonicParams& sensor, double now, SequenceCounter& seq) {
  const double mm = raycast_cone(state.pose, state.heading, sensor, world);
  ThreatReport report;
  report.distance_mm = static_cast<std::uint16_t>(std::lround(mm));
  report.t_measured = now;
  report.seq = seq.next();
  return report;
}

SlaveNode::SlaveNode(const SlaveConfig& config, WorldModel world, UgvState initial, double dt)
    : config_(config),
      world_(std::move(world)),
      dt_(dt),
      state_(initial),
      hold_(config.hold_timeout) {
  config_.gains.validate();
  config_.motor.validate();
  config_.ultrasonic.validate();
}

SlaveOutput SlaveNode::step(double now, const std::vector<Message>& delivered) {
  SlaveOutput out;
  std::optional<std::uint16_t> triggering_command;

  for (const auto& message : delivered) {
    if (const auto* cmd = std::get_if<DriveCommand>(&message)) {
      hold_.apply(*cmd, now);
      out.sent.emplace_back(Ack{seq_.next(), cmd->seq});
      triggering_command = cmd->seq;
    } else if (const auto* beat = std::get_if<Heartbeat>(&message)) {
      out.sent.emplace_back(Ack{seq_.next(), beat->seq});
    }
  }
  hold_.expire(now);
  reference_ = integrate_reference(reference_, hold_.active(), config_.v_ref_max, dt_);

  const double setpoint = servo_reference();
  // Zero derivative kick on the first tick.
  const double prev_error = prev_error_.value_or(setpoint - state_.position);
  const PdOutput pd = pd_control(setpoint, state_, prev_error, config_.gains, dt_);
  prev_error_ = pd.error;
  state_ = ugv_step(state_, pd.motor_drive, config_.motor, dt_, turn_ * config_.max_turn_rate);

  const bool periodic = now >= next_measurement_ - 1e-9;
  if (periodic || triggering_command) {
    const ThreatReport report = measure_ultrasonic(state_, world_, config_.ultrasonic, now, seq_);
    last_distance_ = report.distance_mm;
    out.sent.emplace_back(report);
    if (triggering_command) {
      out.triggered_reports.emplace_back(report.seq, *triggering_command);
    }
    if (periodic) {
      next_measurement_ += config_.ultrasonic.period;
    }
  }
  return out;
}

}  // namespace sensaptic
