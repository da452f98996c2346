#pragma once

// Byte-framed radio protocol between master and slave.
//
//   A5 | type | seq lo | seq hi | len | payload[len] | crc
//
// crc is CRC-8 (poly 0x07, init 0, unreflected, no final xor) over
// type..payload. Payloads:
//   0x01 DriveCommand  int8 direction, uint8 speed_level
//   0x02 ThreatReport  uint16 LE distance_mm
//   0x03 Heartbeat     (empty)
//   0x04 Ack           uint16 LE acked seq

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sensaptic {

inline constexpr std::uint8_t kFrameMagic = 0xA5;
inline constexpr std::size_t kFrameOverhead = 6;

enum class MsgType : std::uint8_t {
  kDriveCommand = 0x01,
  kThreatReport = 0x02,
  kHeartbeat = 0x03,
  kAck = 0x04,
};

struct DriveCommand {
  int direction = 0;             // -1, 0, +1
  std::uint8_t speed_level = 0;  // 0 iff direction == 0
  std::uint16_t seq = 0;

  bool operator==(const DriveCommand&) const = default;
};

struct ThreatReport {
  std::uint16_t distance_mm = 0;
  double t_measured = 0.0;  // not on the wire; receivers stamp arrival
  std::uint16_t seq = 0;

  bool operator==(const ThreatReport& other) const {
    return distance_mm == other.distance_mm && seq == other.seq;
  }
};

struct Heartbeat {
  std::uint16_t seq = 0;

  bool operator==(const Heartbeat&) const = default;
};

struct Ack {
  std::uint16_t seq = 0;
  std::uint16_t acked_seq = 0;

  bool operator==(const Ack&) const = default;
};

using Message = std::variant<DriveCommand, ThreatReport, Heartbeat, Ack>;
using Bytes = std::vector<std::uint8_t>;

std::uint8_t crc8(std::span<const std::uint8_t> data);

MsgType message_type(const Message& message);
std::uint16_t message_seq(const Message& message);

// Throws EncodingError when a field is out of range.
Bytes encode_frame(const Message& message);

// Throws FramingError (empty, truncated, bad magic, trailing bytes),
// IntegrityError (crc mismatch) or ProtocolError (unknown type, bad length
// or field values for the type).
Message decode_frame(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(const std::string& hex);

}  // namespace sensaptic
