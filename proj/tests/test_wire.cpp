#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "sensaptic/errors.hpp"
#include "sensaptic/vectors.hpp"
#include "sensaptic/wire.hpp"

using namespace sensaptic;

namespace {

Message random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> u16(0, 0xFFFF);
  std::uniform_int_distribution<int> speed(1, 255);
  std::uniform_int_distribution<int> dir(-1, 1);
  const auto seq = static_cast<std::uint16_t>(u16(rng));
  switch (kind(rng)) {
    case 0: {
      const int d = dir(rng);
      return DriveCommand{d, static_cast<std::uint8_t>(d == 0 ? 0 : speed(rng)), seq};
    }
    case 1: return ThreatReport{static_cast<std::uint16_t>(u16(rng)), 0.0, seq};
    case 2: return Heartbeat{seq};
    default: return Ack{seq, static_cast<std::uint16_t>(u16(rng))};
  }
}

}  // namespace

TEST_CASE("crc8 matches the bitwise reference and the standard check value") {
  const std::vector<std::uint8_t> check = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  CHECK(crc8(check) == 0xF4);
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(i % 17));
    for (auto& b : data) b = static_cast<std::uint8_t>(byte(rng));
    CHECK(crc8(data) == oracle::crc8_bitwise(data));
  }
}

TEST_CASE("encode_frame examples") {
  // Frozen from a bit-serial CRC computed independently of this code.
  CHECK(to_hex(encode_frame(Heartbeat{0})) == "a5030000003a");
  CHECK(to_hex(encode_frame(DriveCommand{1, 128, 1})) == "a501010002018001");
  CHECK(to_hex(encode_frame(DriveCommand{-1, 200, 0x1234})) == "a501341202ffc8cc");
  CHECK(to_hex(encode_frame(ThreatReport{500, 0.0, 7})) == "a502070002f401ea");
  CHECK(to_hex(encode_frame(ThreatReport{4000, 0.0, 0xFFFF})) == "a502ffff02a00f59");
  CHECK(to_hex(encode_frame(Ack{42, 1})) == "a5042a00020100de");
  CHECK(to_hex(encode_frame(DriveCommand{0, 0, 2})) == "a50102000200003b");
  CHECK(encode_frame(Heartbeat{5}).size() == 6);
  CHECK(encode_frame(Ack{5, 6}).size() == 8);
}

TEST_CASE("encode_frame rejects out-of-range fields") {
  CHECK_THROWS_AS(encode_frame(DriveCommand{2, 10, 0}), EncodingError);
  CHECK_THROWS_AS(encode_frame(DriveCommand{1, 0, 0}), EncodingError);
  CHECK_THROWS_AS(encode_frame(DriveCommand{0, 5, 0}), EncodingError);
}

TEST_CASE("decode_frame errors") {
  CHECK_THROWS_AS(decode_frame(Bytes{}), FramingError);
  CHECK_THROWS_AS(decode_frame(from_hex("b5030000003a")), FramingError);
  CHECK_THROWS_AS(decode_frame(from_hex("a50300")), FramingError);
  CHECK_THROWS_AS(decode_frame(from_hex("a5030000003b")), IntegrityError);
  // Unknown type and wrong payload length, each with a valid crc.
  CHECK_THROWS_AS(decode_frame(oracle::build_frame(0x09, 0, {})), ProtocolError);
  CHECK_THROWS_AS(decode_frame(oracle::build_frame(0x03, 0, {1})), ProtocolError);
  CHECK_THROWS_AS(decode_frame(oracle::build_frame(0x01, 0, {0x02, 9})), ProtocolError);
  CHECK_THROWS_AS(decode_frame(oracle::build_frame(0x01, 0, {0x01, 0})), ProtocolError);
  // len claims more bytes than present / fewer than present.
  auto frame = oracle::build_frame(0x02, 3, {1, 2});
  frame.pop_back();
  frame.pop_back();
  frame.push_back(oracle::crc8_bitwise({frame.begin() + 1, frame.end()}));
  CHECK_THROWS_AS(decode_frame(frame), FramingError);
}

TEST_CASE("decode_frame round trip on valid heartbeat") {
  const Message m = decode_frame(encode_frame(Heartbeat{0}));
  CHECK(std::get<Heartbeat>(m).seq == 0);
}

TEST_CASE("property: round trips over randomized messages and frames") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 20000; ++i) {
    const Message m = random_message(rng);
    CHECK(decode_frame(encode_frame(m)) == m);
  }
  // decode then encode on frames assembled by the test-side builder.
  for (int i = 0; i < 20000; ++i) {
    const Message m = random_message(rng);
    Bytes payload;
    std::uint8_t type = 0;
    std::visit(
        [&](const auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, DriveCommand>) {
            type = 1;
            payload = {static_cast<std::uint8_t>(msg.direction), msg.speed_level};
          } else if constexpr (std::is_same_v<T, ThreatReport>) {
            type = 2;
            payload = {static_cast<std::uint8_t>(msg.distance_mm), static_cast<std::uint8_t>(msg.distance_mm >> 8)};
          } else if constexpr (std::is_same_v<T, Heartbeat>) {
            type = 3;
          } else {
            type = 4;
            payload = {static_cast<std::uint8_t>(msg.acked_seq), static_cast<std::uint8_t>(msg.acked_seq >> 8)};
          }
        },
        m);
    const Bytes frame = oracle::build_frame(type, message_seq(m), payload);
    CHECK(encode_frame(decode_frame(frame)) == frame);
  }
}

TEST_CASE("every single-bit corruption is rejected") {
  for (const auto& v : conformance_corpus()) {
    const Bytes frame = encode_frame(v.message);
    for (std::size_t bit = 0; bit < frame.size() * 8; ++bit) {
      Bytes bad = frame;
      bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      if (bit < 8) {
        CHECK_THROWS_AS(decode_frame(bad), FramingError);
      } else {
        CHECK_THROWS_AS(decode_frame(bad), IntegrityError);
      }
    }
  }
}

TEST_CASE("shipped conformance vectors decode exactly") {
  std::ifstream in(std::string(SENSAPTIC_SOURCE_DIR) + "/data/conformance_vectors.json");
  REQUIRE(in.good());
  const auto doc = nlohmann::json::parse(in);
  const auto& vectors = doc.at("vectors");
  REQUIRE(vectors.size() == conformance_corpus().size());
  for (const auto& v : vectors) {
    const Bytes bytes = from_hex(v.at("hex").get<std::string>());
    const Message expected = message_from_json(v.at("message"));
    REQUIRE(bytes.size() >= 6);
    CHECK(bytes.back() == oracle::crc8_bitwise({bytes.begin() + 1, bytes.end() - 1}));
    CHECK(decode_frame(bytes) == expected);
    CHECK(encode_frame(expected) == bytes);
  }
  CHECK(doc == conformance_json());
}

TEST_CASE("hex helpers") {
  CHECK(from_hex("A5 03\n00") == Bytes{0xA5, 0x03, 0x00});
  CHECK_THROWS_AS(from_hex("a5g"), FramingError);
  CHECK_THROWS_AS(from_hex("a50"), FramingError);
}
