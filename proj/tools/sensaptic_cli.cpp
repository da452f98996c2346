// Command-line front end: scripted runs, the live console server and the
// wire-format conformance vectors.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sensaptic/errors.hpp"
#include "sensaptic/live.hpp"
#include "sensaptic/metrics.hpp"
#include "sensaptic/scenario.hpp"
#include "sensaptic/vectors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  sensaptic::ScenarioConfig config = sensaptic::load_scenario(scenario_path);
  if (seed) config.channel.seed = *seed;
  if (config.mode != sensaptic::RunMode::kScripted) {
    throw sensaptic::ConfigError("mode", "`run` needs a scripted scenario; use `serve` for live mode");
  }
  const sensaptic::RunMetrics metrics = sensaptic::run_scenario(config);
  sensaptic::emit_metrics(metrics, out_dir);

  std::cout << "ticks " << metrics.ticks << ", rmse " << metrics.rmse << " m, settling ";
  if (metrics.settling_time) {
    std::cout << *metrics.settling_time << " s";
  } else {
    std::cout << "n/a";
  }
  std::cout << ", loop latency median " << metrics.latency.median * 1e3 << " ms over "
            << metrics.latency.count << " events\n"
            << "wrote " << out_dir << "/{timeseries.csv,summary.json,wallclock.json}\n";
  return 0;
}

int serve(const std::string& scenario_path, unsigned short port, const std::string& host) {
  sensaptic::ScenarioConfig config = sensaptic::load_scenario(scenario_path);
  sensaptic::LiveServer server(config, port, host);
  server.start();
  std::cout << "serving on http://" << host << ":" << server.port() << " (websocket /ws)"
            << std::endl;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted && server.running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  const std::string failure = server.error();
  server.stop();
  if (!failure.empty()) throw sensaptic::Error("simulation loop stopped: " + failure);
  return 0;
}

int vectors(const std::string& out_path) {
  const std::string text = sensaptic::conformance_json().dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) throw sensaptic::Error("cannot write " + out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piezo self-sensing teleoperation simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "Run a scripted scenario and write metrics");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override channel.seed");

  unsigned short port = 8080;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Run a live session for the operator console");
  serve_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  serve_cmd->add_option("--port", port, "TCP port, 0 picks a free one");
  serve_cmd->add_option("--host", host, "Listen address");

  std::string vectors_out;
  auto* vectors_cmd = app.add_subcommand("vectors", "Emit the wire-format conformance vectors");
  vectors_cmd->add_option("--out", vectors_out, "Output file, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return run(scenario, out_dir, seed);
    if (*serve_cmd) return serve(scenario, port, host);
    if (*vectors_cmd) return vectors(vectors_out);
  } catch (const sensaptic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sensaptic::StartupError& e) {
    std::cerr << "startup error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
