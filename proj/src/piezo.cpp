#include "sensaptic/piezo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace {

void require_positive(double value, const char* field) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ConfigError(std::string("plate.") + field, "must be a positive finite number");
  }
}

}  // namespace

void PiezoPlateParams::validate() const {
  require_positive(d33, "d33");
  require_positive(capacitance, "capacitance");
  require_positive(leak_resistance, "leak_resistance");
  require_positive(max_drive_voltage, "max_drive_voltage");
  require_positive(free_resonance_hz, "free_resonance_hz");
}

PiezoSensor::PiezoSensor(const PiezoPlateParams& plate, double dt)
    : gain_(plate.volts_per_newton()), leak_per_tick_(dt / plate.time_constant()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw MalformedInputError("sensor tick dt must be positive");
  }
  if (leak_per_tick_ >= 1.0) {
    throw MalformedInputError("sensor tick dt must be shorter than the plate's R_leak*C time constant");
  }
}

double PiezoSensor::step(double force) {
  const double previous = last_force_.value_or(force);
  voltage_ += gain_ * (force - previous) - leak_per_tick_ * voltage_;
  last_force_ = force;
  return voltage_;
}

void PiezoSensor::reset() {
  voltage_ = 0.0;
  last_force_.reset();
}

PulseDetector::PulseDetector(double threshold, double dt, double refractory)
    : threshold_(threshold), dt_(dt), refractory_(refractory), quiet_until_(0.0) {
  if (!(threshold > 0.0)) {
    throw ConfigError("master.threshold", "detection threshold must be positive");
  }
  if (!(dt > 0.0)) {
    throw MalformedInputError("detector dt must be positive");
  }
}

std::optional<SensedPulse> PulseDetector::close_excursion() {
  SensedPulse pulse{peak_t_, peak_v_, static_cast<double>(count_) * dt_};
  count_ = 0;
  sign_ = 0;
  if (refractory_ > 0.0) {
    has_quiet_ = true;
  }
  return pulse;
}

std::optional<SensedPulse> PulseDetector::feed(double time, double volts) {
  if (count_ == 0 && has_quiet_) {
    if (time < quiet_until_) {
      return std::nullopt;
    }
    has_quiet_ = false;
  }

  const bool above = std::abs(volts) >= threshold_;
  const int sign = volts > 0.0 ? 1 : -1;

  if (count_ > 0) {
    if (above && sign == sign_) {
      ++count_;
      if (std::abs(volts) > std::abs(peak_v_)) {
        peak_v_ = volts;
        peak_t_ = time;
      }
      return std::nullopt;
    }
    // Run ended on this sample. A direct sign flip above threshold is not
    // started as a new excursion; it falls inside the refractory window or,
    // without one, is picked up on the next sample.
    quiet_until_ = time + refractory_;
    return close_excursion();
  }

  if (above) {
    count_ = 1;
    sign_ = sign;
    peak_v_ = volts;
    peak_t_ = time;
  }
  return std::nullopt;
}

std::optional<SensedPulse> PulseDetector::flush() {
  if (count_ == 0) {
    return std::nullopt;
  }
  return close_excursion();
}

VoltageTrace simulate_sense(const ForceProfile& profile, const PiezoPlateParams& plate, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw MalformedInputError("dt must be positive");
  }
  const auto& samples = profile.samples;
  const double tolerance = 1e-6 * dt;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].force) || !std::isfinite(samples[i].time)) {
      throw MalformedInputError("force profile sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && std::abs(samples[i].time - samples[i - 1].time - dt) > tolerance) {
      throw MalformedInputError("force profile is not uniformly sampled at dt (sample " +
                                std::to_string(i) + ")");
    }
  }

  VoltageTrace trace;
  trace.dt = dt;
  trace.t0 = samples.empty() ? 0.0 : samples.front().time;
  trace.volts.reserve(samples.size());
  PiezoSensor sensor(plate, dt);
  for (const auto& sample : samples) {
    trace.volts.push_back(sensor.step(sample.force));
  }
  return trace;
}

std::optional<SensedPulse> detect_pulse(const VoltageTrace& trace, double threshold) {
  if (trace.volts.empty()) {
    return std::nullopt;
  }
  // A one-sample trace carries no spacing; treat its dwell as one unit tick.
  PulseDetector detector(threshold, trace.dt > 0.0 ? trace.dt : 1.0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (auto pulse = detector.feed(trace.time(i), trace.volts[i])) {
      return pulse;
    }
  }
  return detector.flush();
}

double simulate_actuate(const HapticWaveform& waveform, const PiezoPlateParams& plate) {
  if (waveform.amplitude < 0.0 || waveform.amplitude > plate.max_drive_voltage) {
    throw OutOfModelError("drive amplitude outside [0, max_drive_voltage]");
  }
  if (waveform.frequency >= plate.free_resonance_hz) {
    throw OutOfModelError("drive frequency at or above plate resonance; quasi-static model invalid");
  }
  return plate.d33 * waveform.amplitude;
}

double impulse_force(double peak_force, double width, double offset) {
  if (offset < 0.0 || offset > width) {
    return 0.0;
  }
  return peak_force * std::sin(std::numbers::pi * offset / width);
}

ForceProfile make_impulse(double peak_force, double width, double dt, double length) {
  ForceProfile profile;
  const auto n = static_cast<std::size_t>(std::llround(length / dt)) + 1;
  profile.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    profile.samples.push_back({t, impulse_force(peak_force, width, t)});
  }
  return profile;
}

}  // namespace sensaptic
