#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sensaptic/master.hpp"
#include "sensaptic/wire.hpp"
#include "sensaptic/world.hpp"

namespace sensaptic {

struct UgvState {
  double position = 0.0;     // m along the track (1-DOF)
  double heading = 0.0;      // rad
  double velocity = 0.0;     // m/s
  double motor_drive = 0.0;  // [-1, 1]
  Vec2 pose;                 // m, world-frame sensor origin
};

struct PdGains {
  double kp = 8.0;  // per metre
  double kd = 2.0;  // s per metre

  void validate() const;
};

struct MotorParams {
  double v_max = 0.8;  // m/s
  double tau = 0.2;    // s

  void validate() const;
};

struct PdOutput {
  double motor_drive;
  double error;
};

// u = kp e + kd (e - prev_error)/dt, clamped to [-1, 1].
PdOutput pd_control(double ref_pos, const UgvState& state, double prev_error, const PdGains& gains,
                    double dt);

// First-order motor lag then explicit position update. `turn_rate` (rad/s)
// is the console's steering extension and is 0 in 1-DOF operation.
UgvState ugv_step(const UgvState& state, double motor_drive, const MotorParams& motor, double dt,
                  double turn_rate = 0.0);

// Measures along the vehicle heading from its pose. `seq` is consumed.
ThreatReport measure_ultrasonic(const UgvState& state, const WorldModel& world,
                                const UltrasonicParams& sensor, double now, SequenceCounter& seq);

struct SlaveConfig {
  PdGains gains;
  MotorParams motor;
  UltrasonicParams ultrasonic;
  double v_ref_max = 0.5;
  double hold_timeout = 0.5;
  double max_turn_rate = 1.0;  // rad/s at turn command 1
};

struct SlaveOutput {
  std::vector<Message> sent;
  // ThreatReports sent in direct response to a DriveCommand: (report seq, command seq).
  std::vector<std::pair<std::uint16_t, std::uint16_t>> triggered_reports;
};

// UGV firmware model. Mirrors the master's reference integrator from the
// DriveCommands it receives and servoes to it.
class SlaveNode {
 public:
  SlaveNode(const SlaveConfig& config, WorldModel world, UgvState initial, double dt);

  SlaveOutput step(double now, const std::vector<Message>& delivered);

  // Pins the servo setpoint, bypassing the command mirror.
  void set_reference_override(std::optional<double> ref) { override_ = ref; }
  // Steering extension, normalized to [-1, 1].
  void set_turn(double omega) { turn_ = omega; }

  const UgvState& state() const { return state_; }
  double servo_reference() const { return override_.value_or(reference_.ref_position); }
  std::optional<std::uint16_t> last_distance_mm() const { return last_distance_; }

 private:
  SlaveConfig config_;
  WorldModel world_;
  double dt_;
  UgvState state_;
  CommandHold hold_;
  ReferenceState reference_;
  std::optional<double> override_;
  std::optional<double> prev_error_;
  double turn_ = 0.0;
  double next_measurement_ = 0.0;
  SequenceCounter seq_;
  std::optional<std::uint16_t> last_distance_;
};

}  // namespace sensaptic
