#include "sensaptic/channel.hpp"

#include <algorithm>
#include <cmath>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

// splitmix64 finalizer, used to derive independent per-link seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void ChannelConfig::validate() const {
  if (!(base_latency >= 0.0) || !std::isfinite(base_latency)) {
    throw ConfigError("channel.base_latency", "must be >= 0");
  }
  if (!(jitter_max >= 0.0) || !std::isfinite(jitter_max)) {
    throw ConfigError("channel.jitter_max", "must be >= 0");
  }
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
    throw ConfigError("channel.drop_prob", "must be within [0, 1]");
  }
}

ImpairedLink::ImpairedLink(const ChannelConfig& config, std::uint64_t stream)
    : config_(config), rng_(mix(config.seed ^ mix(stream))) {
  config_.validate();
}

bool ImpairedLink::later(const Pending& a, const Pending& b) {
  return a.deliver_time != b.deliver_time ? a.deliver_time > b.deliver_time : a.order > b.order;
}

double ImpairedLink::next_unit() {
  // 53 high bits -> [0, 1); independent of the standard library's
  // distribution implementation.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void ImpairedLink::submit(Bytes frame, double send_time) {
  ++stats_.sent;
  const double drop_draw = next_unit();
  const double jitter_draw = next_unit();
  if (drop_draw < config_.drop_prob) {
    ++stats_.dropped;
    return;
  }
  const double deliver = send_time + config_.base_latency + jitter_draw * config_.jitter_max;
  pending_.push_back({deliver, submitted_++, send_time, std::move(frame)});
  std::push_heap(pending_.begin(), pending_.end(), later);
}

std::vector<Delivery> ImpairedLink::release(double now) {
  if (now < last_now_) {
    throw Error("channel time moved backwards");
  }
  last_now_ = now;
  std::vector<Delivery> out;
  while (!pending_.empty() && pending_.front().deliver_time <= now) {
    std::pop_heap(pending_.begin(), pending_.end(), later);
    Pending p = std::move(pending_.back());
    pending_.pop_back();
    out.push_back({p.send_time, p.deliver_time, std::move(p.frame)});
    ++stats_.delivered;
  }
  return out;
}

Channel::Channel(const ChannelConfig& config) {
  links_.emplace_back(config, 0);
  links_.emplace_back(config, 1);
}

LinkStats Channel::totals() const {
  LinkStats total;
  for (const auto& link : links_) {
    total.sent += link.stats().sent;
    total.dropped += link.stats().dropped;
    total.delivered += link.stats().delivered;
  }
  return total;
}

}  // namespace sensaptic
