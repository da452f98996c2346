#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "sensaptic/channel.hpp"
#include "sensaptic/master.hpp"
#include "sensaptic/scenario.hpp"
#include "sensaptic/slave.hpp"

namespace sensaptic {

struct Sample {
  double t;
  double ref_pos;
  double slave_pos;
  double motor_drive;
  double distance_mm;
  double haptic_hz;
};

struct FrameEvent {
  std::uint64_t tick;
  Direction direction;
  MsgType type;
  std::uint16_t seq;
  Bytes bytes;
};

struct LatencyEvent {
  std::uint16_t command_seq;
  std::uint64_t detect_tick;
  std::uint64_t haptic_tick;
  double simulated;  // s
  double wall;       // s of compute spent over those ticks
};

struct Snapshot {
  double t = 0.0;
  double ref_pos = 0.0;
  double slave_pos = 0.0;
  double slave_velocity = 0.0;
  double motor_drive = 0.0;
  double distance_mm = 0.0;
  double haptic_hz = 0.0;
  bool haptic_active = false;
  int command_direction = 0;
  int command_speed = 0;
  double heading = 0.0;
  Vec2 pose;
  LinkStats channel;
};

struct SimCounters {
  std::uint64_t pulses_detected = 0;
  std::uint64_t commands_sent = 0;
  std::uint64_t haptic_events = 0;
  std::uint64_t decode_failures = 0;
  std::uint64_t integrity_errors = 0;
  std::uint64_t acks_received = 0;
};

// All nodes advanced on one discrete clock. Per tick: the channel releases
// due frames, the master consumes them and senses the operator force, then
// the slave consumes its frames and servoes. Frames sent during a tick are
// released no earlier than the next tick.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config, bool record_series = true);

  void step();
  void run_to_end();

  // Live input: a press of `magnitude` in [-1, 1] of full-scale force,
  // starting on the next tick.
  void inject_impulse(double magnitude);
  void set_turn(double omega);

  void set_frame_observer(std::function<void(const FrameEvent&)> observer) {
    observer_ = std::move(observer);
  }

  std::uint64_t tick() const { return tick_; }
  double now() const { return static_cast<double>(tick_) * config_.dt; }
  bool finished() const { return tick_ >= config_.tick_count(); }

  Snapshot snapshot() const;
  const std::vector<Sample>& series() const { return series_; }
  const std::vector<LatencyEvent>& latencies() const { return latencies_; }
  const SimCounters& counters() const { return counters_; }
  const Channel& channel() const { return channel_; }
  const ScenarioConfig& config() const { return config_; }
  const MasterNode& master() const { return master_; }
  const SlaveNode& slave() const { return slave_; }

 private:
  struct ActiveImpulse {
    std::uint64_t start_tick;
    double force;
    double width;
  };

  std::vector<Message> receive(Direction d, double now);
  void send(Direction d, const std::vector<Message>& messages, double now);
  double operator_force();
  void apply_reference_steps(double now);

  ScenarioConfig config_;
  bool record_series_;
  MasterNode master_;
  SlaveNode slave_;
  Channel channel_;
  std::uint64_t tick_ = 0;
  std::uint64_t record_every_;

  std::vector<OperatorImpulse> script_;  // sorted by t
  std::size_t next_script_ = 0;
  std::vector<ActiveImpulse> active_;
  std::size_t next_step_ = 0;

  std::map<std::uint16_t, std::uint64_t> pulse_tick_;      // command seq -> detect tick
  std::map<std::uint16_t, double> pulse_wall_start_;       // command seq -> cumulative wall s
  std::map<std::uint16_t, std::uint16_t> report_command_;  // report seq -> command seq
  double wall_total_ = 0.0;

  std::vector<Sample> series_;
  std::vector<LatencyEvent> latencies_;
  SimCounters counters_;
  std::function<void(const FrameEvent&)> observer_;
};

}  // namespace sensaptic
