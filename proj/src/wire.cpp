#include "sensaptic/wire.hpp"

#include <array>
#include <cctype>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

constexpr std::array<std::uint8_t, 256> make_crc_table() {
  std::array<std::uint8_t, 256> table{};
  for (int i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint8_t>(i);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<std::uint8_t>(crc << 1);
    }
    table[static_cast<std::size_t>(i)] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

std::size_t expected_payload(MsgType type) {
  switch (type) {
    case MsgType::kDriveCommand: return 2;
    case MsgType::kThreatReport: return 2;
    case MsgType::kHeartbeat: return 0;
    case MsgType::kAck: return 2;
  }
  return 0;
}

void put_u16(Bytes& out, std::uint16_t value) {
  out.push_back(static_cast<std::uint8_t>(value & 0xFF));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
}

std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
}

struct PayloadWriter {
  Bytes& out;

  void operator()(const DriveCommand& cmd) const {
    if (cmd.direction < -1 || cmd.direction > 1) {
      throw EncodingError("DriveCommand direction must be -1, 0 or +1");
    }
    if ((cmd.speed_level == 0) != (cmd.direction == 0)) {
      throw EncodingError("DriveCommand speed_level must be 0 exactly when direction is 0");
    }
    out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(cmd.direction)));
    out.push_back(cmd.speed_level);
  }
  void operator()(const ThreatReport& report) const { put_u16(out, report.distance_mm); }
  void operator()(const Heartbeat&) const {}
  void operator()(const Ack& ack) const { put_u16(out, ack.acked_seq); }
};

}  // namespace

std::uint8_t crc8(std::span<const std::uint8_t> data) {
  std::uint8_t crc = 0;
  for (auto byte : data) {
    crc = kCrcTable[crc ^ byte];
  }
  return crc;
}

MsgType message_type(const Message& message) {
  struct Visitor {
    MsgType operator()(const DriveCommand&) const { return MsgType::kDriveCommand; }
    MsgType operator()(const ThreatReport&) const { return MsgType::kThreatReport; }
    MsgType operator()(const Heartbeat&) const { return MsgType::kHeartbeat; }
    MsgType operator()(const Ack&) const { return MsgType::kAck; }
  };
  return std::visit(Visitor{}, message);
}

std::uint16_t message_seq(const Message& message) {
  return std::visit([](const auto& m) { return m.seq; }, message);
}

Bytes encode_frame(const Message& message) {
  Bytes out;
  out.reserve(kFrameOverhead + 2);
  out.push_back(kFrameMagic);
  out.push_back(static_cast<std::uint8_t>(message_type(message)));
  put_u16(out, message_seq(message));
  out.push_back(0);  // len, patched below
  std::visit(PayloadWriter{out}, message);
  out[4] = static_cast<std::uint8_t>(out.size() - 5);
  out.push_back(crc8(std::span(out).subspan(1)));
  return out;
}

Message decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) {
    throw FramingError("empty frame");
  }
  if (bytes[0] != kFrameMagic) {
    throw FramingError("bad magic byte");
  }
  if (bytes.size() < kFrameOverhead) {
    throw FramingError("truncated frame header");
  }
  // Frames arrive as whole datagrams, so the crc sits in the last byte
  // regardless of len. Checking it first turns a corrupted len into an
  // integrity error rather than a framing one.
  if (crc8(bytes.subspan(1, bytes.size() - 2)) != bytes.back()) {
    throw IntegrityError("crc mismatch");
  }
  const std::size_t len = bytes[4];
  if (bytes.size() < kFrameOverhead + len) {
    throw FramingError("truncated frame payload");
  }
  if (bytes.size() > kFrameOverhead + len) {
    throw FramingError("trailing bytes after frame");
  }

  const std::uint8_t raw_type = bytes[1];
  if (raw_type < 0x01 || raw_type > 0x04) {
    throw ProtocolError("unknown msg_type");
  }
  const auto type = static_cast<MsgType>(raw_type);
  if (len != expected_payload(type)) {
    throw ProtocolError("payload length does not match msg_type");
  }
  const std::uint16_t seq = get_u16(bytes, 2);
  const auto payload = bytes.subspan(5, len);

  switch (type) {
    case MsgType::kDriveCommand: {
      const int direction = static_cast<std::int8_t>(payload[0]);
      const std::uint8_t speed = payload[1];
      if (direction < -1 || direction > 1 || (speed == 0) != (direction == 0)) {
        throw ProtocolError("DriveCommand fields out of range");
      }
      return DriveCommand{direction, speed, seq};
    }
    case MsgType::kThreatReport:
      return ThreatReport{get_u16(payload, 0), 0.0, seq};
    case MsgType::kHeartbeat:
      return Heartbeat{seq};
    case MsgType::kAck:
      return Ack{seq, get_u16(payload, 0)};
  }
  throw ProtocolError("unknown msg_type");
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto byte : bytes) {
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0x0F]);
  }
  return out;
}

Bytes from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower >= 'a' && lower <= 'f') return lower - 'a' + 10;
    return -1;
  };
  Bytes out;
  int high = -1;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const int value = nibble(c);
    if (value < 0) {
      throw FramingError("invalid hex digit");
    }
    if (high < 0) {
      high = value;
    } else {
      out.push_back(static_cast<std::uint8_t>((high << 4) | value));
      high = -1;
    }
  }
  if (high >= 0) {
    throw FramingError("odd number of hex digits");
  }
  return out;
}

}  // namespace sensaptic
