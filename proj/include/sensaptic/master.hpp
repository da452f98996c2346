#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sensaptic/piezo.hpp"
#include "sensaptic/wire.hpp"

namespace sensaptic {

struct ReferenceState {
  double ref_position = 0.0;       // m
  double last_command_time = 0.0;  // s
};

struct Calibration {
  double threshold = 0.1;         // V, pulse detection
  double v_full_scale = 0.0;      // V, maps to speed_level 255
  double v_ref_max = 0.5;         // m/s at speed_level 255
  double hold_timeout = 0.5;      // s before a command returns to neutral
  double refractory = 0.02;       // s of ignored input after each pulse
  double heartbeat_period = 0.1;  // s
};

struct ThreatMap {
  double d_min = 20.0;    // mm, intensity 1
  double d_safe = 1000.0; // mm, intensity 0
  double f_min = 50.0;    // Hz
  double f_max = 300.0;   // Hz
  double feedback_period = 0.06;  // s, duration of one rendered waveform
};

// Sequence counter shared by every frame a node sends.
class SequenceCounter {
 public:
  std::uint16_t next() { return value_++; }
  std::uint16_t peek() const { return value_; }

 private:
  std::uint16_t value_ = 0;
};

// direction = sign(v_peak); speed_level = clamp(round(255 |v_peak| / v_full_scale), 1, 255).
DriveCommand classify_command(const SensedPulse& pulse, double v_full_scale, SequenceCounter& seq);

ReferenceState integrate_reference(const ReferenceState& state, const DriveCommand& cmd,
                                   double v_ref_max, double dt);

// Normalized threat in [0, 1]; throws ConfigError when d_min >= d_safe.
double threat_to_intensity(const ThreatReport& report, double d_min, double d_safe);

// Vibration frequency the haptic channel carries for a given intensity.
double haptic_frequency(double intensity, double f_min, double f_max);

// No waveform when intensity is 0; otherwise full drive at the mapped frequency.
std::optional<HapticWaveform> render_haptic(double intensity, double f_min, double f_max,
                                            double duration, const PiezoPlateParams& plate);

// Holds the most recent command and expires it to neutral after the hold
// timeout. Both nodes run one: the master to build its reference, the slave
// to mirror that reference from received commands.
class CommandHold {
 public:
  explicit CommandHold(double hold_timeout) : hold_timeout_(hold_timeout) {}

  void apply(const DriveCommand& cmd, double now);
  // True when the active command expired at `now` (and is now neutral).
  bool expire(double now);

  const DriveCommand& active() const { return active_; }
  double issued_at() const { return issued_at_; }

 private:
  double hold_timeout_;
  DriveCommand active_{};
  double issued_at_ = 0.0;
};

struct MasterConfig {
  Calibration calibration;
  ThreatMap threat;
  PiezoPlateParams plate;
};

struct HapticIssue {
  HapticWaveform waveform;
  double displacement;      // m, actuator peak
  std::uint16_t report_seq; // ThreatReport that caused it
};

struct MasterOutput {
  std::vector<Message> sent;
  std::optional<SensedPulse> pulse;
  std::optional<DriveCommand> pulse_command;  // command classified from `pulse`
  std::optional<HapticIssue> haptic;
};

// Handheld master: piezo sensing path, command classification, reference
// integration and haptic rendering of incoming threat reports.
class MasterNode {
 public:
  MasterNode(const MasterConfig& config, double dt);

  // One tick: consume delivered messages, feed the sensing plate the
  // operator force for this tick, emit frames.
  MasterOutput step(double now, double operator_force, const std::vector<Message>& delivered);

  // Test and override hook: pins the reference.
  void set_reference(double position) { reference_.ref_position = position; }

  const ReferenceState& reference() const { return reference_; }
  const DriveCommand& active_command() const { return hold_.active(); }
  double voltage() const { return sensor_.voltage(); }
  std::optional<std::uint16_t> last_distance_mm() const { return last_distance_; }
  double haptic_hz() const { return haptic_hz_; }
  bool haptic_active() const { return haptic_active_; }
  std::uint64_t acks_received() const { return acks_; }

 private:
  MasterConfig config_;
  double dt_;
  PiezoSensor sensor_;
  PulseDetector detector_;
  CommandHold hold_;
  ReferenceState reference_;
  SequenceCounter seq_;
  double next_heartbeat_ = 0.0;
  std::optional<std::uint16_t> last_distance_;
  double haptic_hz_;
  bool haptic_active_ = false;
  double haptic_until_ = 0.0;
  std::uint64_t acks_ = 0;
};

}  // namespace sensaptic
