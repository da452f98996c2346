#include "sensaptic/vectors.hpp"

#include "sensaptic/errors.hpp"

namespace sensaptic {

using nlohmann::json;

std::vector<ConformanceVector> conformance_corpus() {
  return {
      {"heartbeat_seq0", Heartbeat{0}},
      {"heartbeat_seq_max", Heartbeat{0xFFFF}},
      {"drive_forward_half", DriveCommand{1, 128, 1}},
      {"drive_forward_full", DriveCommand{1, 255, 2}},
      {"drive_reverse_min", DriveCommand{-1, 1, 0x0100}},
      {"drive_reverse_full", DriveCommand{-1, 255, 0x1234}},
      {"drive_neutral", DriveCommand{0, 0, 2}},
      {"threat_500mm", ThreatReport{500, 0.0, 7}},
      {"threat_range_min", ThreatReport{20, 0.0, 8}},
      {"threat_range_max", ThreatReport{4000, 0.0, 0xFFFF}},
      {"ack_42", Ack{42, 1}},
      {"ack_wrap", Ack{0xFFFF, 0xFFFE}},
  };
}

json message_to_json(const Message& message) {
  struct Visitor {
    json operator()(const DriveCommand& m) const {
      return {{"type", "drive_command"}, {"seq", m.seq}, {"direction", m.direction},
              {"speed_level", m.speed_level}};
    }
    json operator()(const ThreatReport& m) const {
      return {{"type", "threat_report"}, {"seq", m.seq}, {"distance_mm", m.distance_mm}};
    }
    json operator()(const Heartbeat& m) const { return {{"type", "heartbeat"}, {"seq", m.seq}}; }
    json operator()(const Ack& m) const {
      return {{"type", "ack"}, {"seq", m.seq}, {"acked_seq", m.acked_seq}};
    }
  };
  return std::visit(Visitor{}, message);
}

Message message_from_json(const json& doc) {
  try {
    const std::string type = doc.at("type").get<std::string>();
    const auto seq = doc.at("seq").get<std::uint16_t>();
    if (type == "drive_command") {
      return DriveCommand{doc.at("direction").get<int>(), doc.at("speed_level").get<std::uint8_t>(), seq};
    }
    if (type == "threat_report") {
      return ThreatReport{doc.at("distance_mm").get<std::uint16_t>(), 0.0, seq};
    }
    if (type == "heartbeat") {
      return Heartbeat{seq};
    }
    if (type == "ack") {
      return Ack{seq, doc.at("acked_seq").get<std::uint16_t>()};
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message JSON: ") + e.what());
  }
  throw ProtocolError("unknown message type in JSON");
}

json conformance_json() {
  json vectors = json::array();
  for (const auto& v : conformance_corpus()) {
    vectors.push_back({{"name", v.name}, {"hex", to_hex(encode_frame(v.message))},
                       {"message", message_to_json(v.message)}});
  }
  return {{"vectors", vectors}};
}

}  // namespace sensaptic
