#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensaptic/scenario.hpp"
#include "sensaptic/simulation.hpp"

namespace sensaptic {

struct LatencyStats {
  std::size_t count = 0;
  double median = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

struct RunMetrics {
  std::vector<Sample> series;
  double rmse = 0.0;                     // m, after settling
  std::optional<double> settling_time;   // s from first reference change
  std::vector<double> latencies;         // s simulated, pulse -> haptic
  std::vector<double> wall_latencies;    // s compute for the same events
  LatencyStats latency;
  LatencyStats wall_latency;
  LinkStats master_to_slave;
  LinkStats slave_to_master;
  SimCounters counters;
  std::uint64_t ticks = 0;
  double dt = 0.0;
};

// Nearest-rank percentile, q in [0, 1]. Empty input gives 0.
double percentile(std::span<const double> values, double q);
LatencyStats summarize(std::span<const double> values);

struct Tracking {
  double rmse = 0.0;
  std::optional<double> settling_time;
};

// Settling: the first time after the first reference change from which
// |ref - pos| stays within band * max|ref - ref(0)|. RMSE covers samples from
// then on, or the whole series when it never settles.
Tracking tracking_metrics(std::span<const Sample> series, double band);

RunMetrics collect_metrics(const Simulation& sim);

// Runs a scripted scenario to completion. Throws ConfigError for a live-mode
// or invalid config.
RunMetrics run_scenario(const ScenarioConfig& config);

// Byte-stable metrics formatting.
std::string format_series_csv(std::span<const Sample> series);
nlohmann::json summary_json(const RunMetrics& metrics);
nlohmann::json wallclock_json(const RunMetrics& metrics);

// Writes timeseries.csv and summary.json (deterministic) plus
// wallclock.json (host timing, not reproducible) into `dir`.
void emit_metrics(const RunMetrics& metrics, const std::filesystem::path& dir);

}  // namespace sensaptic
