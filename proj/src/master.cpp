#include "sensaptic/master.hpp"

#include <algorithm>
#include <cmath>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

constexpr double kTimeEps = 1e-9;

}  // namespace

DriveCommand classify_command(const SensedPulse& pulse, double v_full_scale, SequenceCounter& seq) {
  if (!(v_full_scale > 0.0)) {
    throw ConfigError("master.v_full_scale", "must be positive");
  }
  DriveCommand cmd;
  cmd.direction = pulse.v_peak > 0.0 ? 1 : (pulse.v_peak < 0.0 ? -1 : 0);
  if (cmd.direction == 0) {
    // Unreachable for a valid pulse; keeps the speed/direction invariant.
    cmd.speed_level = 0;
  } else {
    const double level = std::round(255.0 * std::abs(pulse.v_peak) / v_full_scale);
    cmd.speed_level = static_cast<std::uint8_t>(std::clamp(level, 1.0, 255.0));
  }
  cmd.seq = seq.next();
  return cmd;
}

ReferenceState integrate_reference(const ReferenceState& state, const DriveCommand& cmd,
                                   double v_ref_max, double dt) {
  ReferenceState next = state;
  next.ref_position += cmd.direction * (cmd.speed_level / 255.0) * v_ref_max * dt;
  return next;
}

double threat_to_intensity(const ThreatReport& report, double d_min, double d_safe) {
  if (!(d_min < d_safe)) {
    throw ConfigError("master.d_min", "d_min must be below d_safe");
  }
  const double intensity = (d_safe - report.distance_mm) / (d_safe - d_min);
  return std::clamp(intensity, 0.0, 1.0);
}

double haptic_frequency(double intensity, double f_min, double f_max) {
  return f_min + intensity * (f_max - f_min);
}

std::optional<HapticWaveform> render_haptic(double intensity, double f_min, double f_max,
                                            double duration, const PiezoPlateParams& plate) {
  if (!(intensity > 0.0)) {
    return std::nullopt;
  }
  return HapticWaveform{haptic_frequency(intensity, f_min, f_max), plate.max_drive_voltage,
                        duration};
}

void CommandHold::apply(const DriveCommand& cmd, double now) {
  active_ = cmd;
  issued_at_ = now;
}

bool CommandHold::expire(double now) {
  if (active_.direction == 0 || now - issued_at_ < hold_timeout_ - kTimeEps) {
    return false;
  }
  active_.direction = 0;
  active_.speed_level = 0;
  issued_at_ = now;
  return true;
}

MasterNode::MasterNode(const MasterConfig& config, double dt)
    : config_(config),
      dt_(dt),
      sensor_(config.plate, dt),
      detector_(config.calibration.threshold, dt, config.calibration.refractory),
      hold_(config.calibration.hold_timeout),
      haptic_hz_(config.threat.f_min) {
  if (!(config.threat.d_min < config.threat.d_safe)) {
    throw ConfigError("master.d_min", "d_min must be below d_safe");
  }
  if (!(config.threat.f_min < config.threat.f_max)) {
    throw ConfigError("master.f_min", "f_min must be below f_max");
  }
}

MasterOutput MasterNode::step(double now, double operator_force,
                              const std::vector<Message>& delivered) {
  MasterOutput out;
  const auto& cal = config_.calibration;
  const auto& threat = config_.threat;

  for (const auto& message : delivered) {
    if (const auto* report = std::get_if<ThreatReport>(&message)) {
      last_distance_ = report->distance_mm;
      const double intensity = threat_to_intensity(*report, threat.d_min, threat.d_safe);
      haptic_hz_ = haptic_frequency(intensity, threat.f_min, threat.f_max);
      if (auto waveform = render_haptic(intensity, threat.f_min, threat.f_max,
                                        threat.feedback_period, config_.plate)) {
        haptic_active_ = true;
        haptic_until_ = now + waveform->duration;
        out.haptic = HapticIssue{*waveform, simulate_actuate(*waveform, config_.plate),
                                 report->seq};
      } else {
        haptic_active_ = false;
      }
    } else if (std::holds_alternative<Ack>(message)) {
      ++acks_;
    }
  }
  if (haptic_active_ && !out.haptic && now >= haptic_until_ - kTimeEps) {
    haptic_active_ = false;
  }

  const double volts = sensor_.step(operator_force);
  if (auto pulse = detector_.feed(now, volts)) {
    const DriveCommand cmd = classify_command(*pulse, cal.v_full_scale, seq_);
    hold_.apply(cmd, now);
    reference_.last_command_time = now;
    out.pulse = pulse;
    out.pulse_command = cmd;
    out.sent.emplace_back(cmd);
  } else if (hold_.expire(now)) {
    DriveCommand neutral{0, 0, seq_.next()};
    hold_.apply(neutral, now);
    out.sent.emplace_back(neutral);
  }

  reference_ = integrate_reference(reference_, hold_.active(), cal.v_ref_max, dt_);

  if (now >= next_heartbeat_ - kTimeEps) {
    out.sent.emplace_back(Heartbeat{seq_.next()});
    next_heartbeat_ += cal.heartbeat_period;
  }
  return out;
}

}  // namespace sensaptic
