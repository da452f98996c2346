#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensaptic/scenario.hpp"
#include "sensaptic/simulation.hpp"

namespace sensaptic {

// Operator input arriving from a console client.
struct ConsoleInput {
  enum class Kind { kImpulse, kTurn } kind;
  double value;
};

// Parses one client text message. Returns nothing for anything that is not
// a well-formed impulse or turn message with its value in [-1, 1].
std::optional<ConsoleInput> parse_console_message(const std::string& text);

nlohmann::json telemetry_json(const Snapshot& snapshot);

// Real-time session behind the operator console. The simulation runs on its
// own thread paced to the wall clock; socket traffic is handled on an I/O
// thread and only touches the simulation through an input queue.
//
// Endpoints: `/ws` upgrades to a websocket carrying JSON messages, any other
// GET is served from live.assets_dir when one is configured.
class LiveServer {
 public:
  // Binds immediately; throws StartupError if the address is unavailable.
  // Port 0 picks a free port.
  LiveServer(const ScenarioConfig& config, unsigned short port,
             const std::string& host = "127.0.0.1");
  ~LiveServer();

  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  void start();
  void stop();
  // False once stopped or after the simulation loop failed.
  bool running() const;
  // Message of the exception that ended the simulation loop, if any.
  std::string error() const;

  unsigned short port() const;

  // Same path a console message takes onto the simulation loop.
  void submit(const ConsoleInput& input);

  Snapshot snapshot() const;
  std::uint64_t tick() const;
  std::vector<FrameEvent> frame_log() const;
  std::vector<std::uint64_t> detection_ticks() const;
  std::uint64_t malformed_messages() const;
  std::uint64_t telemetry_sent() const;
  std::size_t clients() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace sensaptic
