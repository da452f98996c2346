#pragma once

// Bi-functional piezo plate: the direct effect turns operator force into a
// voltage pulse (sensing), the inverse effect turns drive voltage into a
// vibration displacement (haptics).

#include <optional>
#include <span>
#include <vector>

namespace sensaptic {

struct PiezoPlateParams {
  double d33 = 500e-12;             // C/N (numerically m/V for the inverse effect)
  double capacitance = 10e-9;       // F
  double leak_resistance = 10e6;    // ohm
  double max_drive_voltage = 150.0; // V
  double free_resonance_hz = 4000.0;

  double time_constant() const { return leak_resistance * capacitance; }
  // Open-terminal voltage per newton of instantaneous force change.
  double volts_per_newton() const { return d33 / capacitance; }

  // Throws ConfigError when any constant is non-positive or non-finite.
  void validate() const;
};

struct ForceSample {
  double time;   // s
  double force;  // N, sign encodes push direction
};

struct ForceProfile {
  std::vector<ForceSample> samples;
};

// Uniformly sampled voltage trace, sample i at t0 + i*dt.
struct VoltageTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> volts;

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  std::size_t size() const { return volts.size(); }
};

struct SensedPulse {
  double t_peak;    // s
  double v_peak;    // V, signed
  double duration;  // s, above-threshold dwell
};

struct HapticWaveform {
  double frequency;  // Hz
  double amplitude;  // V
  double duration;   // s
};

// Stepwise form of the first-order leakage model
//   dV/dt = (d33/C) dF/dt - V / (R_leak C)
// integrated explicitly once per tick. V starts at 0 and the force history
// starts at the first sample fed in.
class PiezoSensor {
 public:
  PiezoSensor(const PiezoPlateParams& plate, double dt);

  double step(double force);
  double voltage() const { return voltage_; }
  void reset();

 private:
  double gain_;
  double leak_per_tick_;
  double voltage_ = 0.0;
  std::optional<double> last_force_;
};

// Streaming threshold-crossing detector. An excursion is a run of
// consecutive samples with |V| >= threshold and a common sign; the pulse is
// reported on the first sample after the run ends. After a report the
// detector ignores input for `refractory` seconds.
class PulseDetector {
 public:
  PulseDetector(double threshold, double dt, double refractory = 0.0);

  std::optional<SensedPulse> feed(double time, double volts);
  // Closes an excursion still open at end of data.
  std::optional<SensedPulse> flush();

  bool in_excursion() const { return count_ > 0; }

 private:
  std::optional<SensedPulse> close_excursion();

  double threshold_;
  double dt_;
  double refractory_;
  double quiet_until_;
  bool has_quiet_ = false;
  std::size_t count_ = 0;
  int sign_ = 0;
  double peak_v_ = 0.0;
  double peak_t_ = 0.0;
};

VoltageTrace simulate_sense(const ForceProfile& profile, const PiezoPlateParams& plate, double dt);

std::optional<SensedPulse> detect_pulse(const VoltageTrace& trace, double threshold);

// Quasi-static free displacement amplitude (m) for a haptic drive waveform.
double simulate_actuate(const HapticWaveform& waveform, const PiezoPlateParams& plate);

// Half-sine force impulse of the given peak and width, sampled at dt over
// [0, length]. Used for scripted operator input and live console impulses.
ForceProfile make_impulse(double peak_force, double width, double dt, double length);

// Force of a half-sine impulse at `offset` seconds after its start.
double impulse_force(double peak_force, double width, double offset);

}  // namespace sensaptic
