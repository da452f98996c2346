#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sensaptic/wire.hpp"

namespace sensaptic {

struct ChannelConfig {
  double base_latency = 0.0;  // s
  double jitter_max = 0.0;    // s, uniform additive in [0, jitter_max)
  double drop_prob = 0.0;     // [0, 1]
  std::uint64_t seed = 1;

  void validate() const;
};

struct LinkStats {
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered = 0;
};

struct Delivery {
  double send_time;
  double deliver_time;
  Bytes frame;
};

// One direction of the radio. Every submitted frame is independently
// dropped with drop_prob, otherwise delivered at
// send_time + base_latency + U(0, jitter_max). Release order is by delivery
// time, ties in submission order.
class ImpairedLink {
 public:
  ImpairedLink(const ChannelConfig& config, std::uint64_t stream);

  void submit(Bytes frame, double send_time);
  // Releases every frame due at or before `now`. `now` must not decrease.
  std::vector<Delivery> release(double now);

  const LinkStats& stats() const { return stats_; }
  std::size_t in_flight() const { return pending_.size(); }

 private:
  struct Pending {
    double deliver_time;
    std::uint64_t order;
    double send_time;
    Bytes frame;
  };

  static bool later(const Pending& a, const Pending& b);
  double next_unit();

  ChannelConfig config_;
  std::mt19937_64 rng_;
  std::vector<Pending> pending_;  // min-heap on (deliver_time, order)
  std::uint64_t submitted_ = 0;
  double last_now_ = -1.0;
  LinkStats stats_;
};

enum class Direction { kMasterToSlave = 0, kSlaveToMaster = 1 };

// Both directions of the master/slave radio, seeded from one config.
class Channel {
 public:
  explicit Channel(const ChannelConfig& config);

  ImpairedLink& link(Direction d) { return links_[static_cast<int>(d)]; }
  const ImpairedLink& link(Direction d) const { return links_[static_cast<int>(d)]; }

  LinkStats totals() const;

 private:
  std::vector<ImpairedLink> links_;
};

}  // namespace sensaptic
