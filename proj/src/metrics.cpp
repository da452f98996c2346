#include "sensaptic/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "sensaptic/errors.hpp"

namespace sensaptic {

using nlohmann::json;

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, result.ptr);
}

json stats_json(const LatencyStats& s) {
  return {{"count", s.count}, {"median", s.median}, {"p95", s.p95}, {"p99", s.p99}, {"max", s.max}};
}

json link_json(const LinkStats& s) {
  return {{"sent", s.sent}, {"dropped", s.dropped}, {"delivered", s.delivered}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << content;
  out.close();
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

}  // namespace

double percentile(std::span<const double> values, double q) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(q * static_cast<double>(sorted.size()));
  const auto index = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(sorted.size()))) - 1;
  return sorted[index];
}

LatencyStats summarize(std::span<const double> values) {
  LatencyStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.median = percentile(values, 0.5);
  s.p95 = percentile(values, 0.95);
  s.p99 = percentile(values, 0.99);
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

Tracking tracking_metrics(std::span<const Sample> series, double band) {
  Tracking out;
  if (series.empty()) {
    out.settling_time = 0.0;
    return out;
  }
  const double ref0 = series.front().ref_pos;
  std::size_t first_change = series.size();
  double excursion = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = std::abs(series[i].ref_pos - ref0);
    if (d > 0.0 && first_change == series.size()) first_change = i;
    excursion = std::max(excursion, d);
  }

  auto rmse_from = [&](std::size_t begin) {
    double sum = 0.0;
    for (std::size_t i = begin; i < series.size(); ++i) {
      const double e = series[i].ref_pos - series[i].slave_pos;
      sum += e * e;
    }
    const std::size_t n = series.size() - begin;
    return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
  };

  if (first_change == series.size()) {
    out.settling_time = 0.0;
    out.rmse = rmse_from(0);
    return out;
  }

  const double limit = band * excursion;
  std::size_t settled_at = first_change;
  for (std::size_t i = first_change; i < series.size(); ++i) {
    if (std::abs(series[i].ref_pos - series[i].slave_pos) > limit) {
      settled_at = i + 1;
    }
  }
  if (settled_at >= series.size()) {
    out.rmse = rmse_from(0);
    return out;
  }
  out.settling_time = series[settled_at].t - series[first_change].t;
  out.rmse = rmse_from(settled_at);
  return out;
}

RunMetrics collect_metrics(const Simulation& sim) {
  RunMetrics m;
  m.series = sim.series();
  const Tracking tracking = tracking_metrics(m.series, sim.config().settle_band);
  m.rmse = tracking.rmse;
  m.settling_time = tracking.settling_time;
  for (const auto& event : sim.latencies()) {
    m.latencies.push_back(event.simulated);
    m.wall_latencies.push_back(event.wall);
  }
  m.latency = summarize(m.latencies);
  m.wall_latency = summarize(m.wall_latencies);
  m.master_to_slave = sim.channel().link(Direction::kMasterToSlave).stats();
  m.slave_to_master = sim.channel().link(Direction::kSlaveToMaster).stats();
  m.counters = sim.counters();
  m.ticks = sim.tick();
  m.dt = sim.config().dt;
  return m;
}

RunMetrics run_scenario(const ScenarioConfig& config) {
  if (config.mode != RunMode::kScripted) {
    throw ConfigError("mode", "run_scenario requires a scripted scenario");
  }
  Simulation sim(config);
  sim.run_to_end();
  return collect_metrics(sim);
}

std::string format_series_csv(std::span<const Sample> series) {
  std::string out = "t,ref_pos,slave_pos,motor_drive,distance_mm,haptic_hz\n";
  out.reserve(out.size() + series.size() * 80);
  for (const auto& s : series) {
    append_number(out, s.t);
    out.push_back(',');
    append_number(out, s.ref_pos);
    out.push_back(',');
    append_number(out, s.slave_pos);
    out.push_back(',');
    append_number(out, s.motor_drive);
    out.push_back(',');
    append_number(out, s.distance_mm);
    out.push_back(',');
    append_number(out, s.haptic_hz);
    out.push_back('\n');
  }
  return out;
}

json summary_json(const RunMetrics& m) {
  return {
      {"ticks", m.ticks},
      {"dt", m.dt},
      {"tracking_rmse_m", m.rmse},
      {"settling_time_s", m.settling_time ? json(*m.settling_time) : json(nullptr)},
      {"loop_latency_s", stats_json(m.latency)},
      {"loop_latency_samples_s", m.latencies},
      {"channel",
       {{"master_to_slave", link_json(m.master_to_slave)},
        {"slave_to_master", link_json(m.slave_to_master)}}},
      {"events",
       {{"pulses_detected", m.counters.pulses_detected},
        {"commands_sent", m.counters.commands_sent},
        {"haptic_events", m.counters.haptic_events},
        {"acks_received", m.counters.acks_received},
        {"decode_failures", m.counters.decode_failures},
        {"integrity_errors", m.counters.integrity_errors}}},
  };
}

json wallclock_json(const RunMetrics& m) {
  return {{"loop_compute_s", stats_json(m.wall_latency)}, {"samples_s", m.wall_latencies}};
}

void emit_metrics(const RunMetrics& metrics, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create " + dir.string() + ": " + ec.message());
  }
  write_file(dir / "timeseries.csv", format_series_csv(metrics.series));
  write_file(dir / "summary.json", summary_json(metrics).dump(2) + "\n");
  write_file(dir / "wallclock.json", wallclock_json(metrics).dump(2) + "\n");
}

}  // namespace sensaptic
