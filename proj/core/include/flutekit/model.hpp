#pragma once

// Forward evaluation of a fitted FluteModel: the octave register as a
// hysteresis state machine plus the pitch-bend curve.

#include <optional>
#include <span>
#include <vector>

#include "flutekit/fit.hpp"

namespace flutekit {

/// 440 * 2^((pitch - 69) / 12).
double midi_to_hz(double pitch_midi);

/// ln-pressure at which the sounding pitch is in tune: meta_slope * pitch + meta_intercept.
double x_intercept_at(const FluteModel& model, double sounding_pitch);

struct BendResult {
  double q = 1.0;
  double bend = 0.0;  // semitones, 12 log2 q
  bool valid = true;
};

/// Values of 1 + s (ln P - x_int) at or below zero are clamped so that
/// q^power = kBelowSpeakingFloor and flagged invalid.
inline constexpr double kBelowSpeakingFloor = 1e-6;

/// Throws Error(input) for gauge_pressure <= 0.
BendResult bend_at(const FluteModel& model, double sounding_pitch, double gauge_pressure);

enum class Register { low, high };

struct HysteresisState {
  Register reg = Register::low;
  friend bool operator==(const HysteresisState&, const HysteresisState&) = default;
};

/// exp(thr_slope * base_pitch + intercept) for each direction.
double up_threshold_pa(const FluteModel& model, double base_pitch);
double down_threshold_pa(const FluteModel& model, double base_pitch);

struct StepResult {
  HysteresisState state;
  std::optional<Direction> jumped;
};

/// low and P > P_up -> high; high and P < P_down -> low; otherwise unchanged.
StepResult step_hysteresis(const FluteModel& model, HysteresisState state, double base_pitch,
                           double gauge_pressure);

struct TracePoint {
  Register reg = Register::low;
  double sounding_pitch = 0.0;
  double q = 1.0;
  double bend = 0.0;
  double f_hz = 0.0;
  bool valid = true;
  std::optional<Direction> jumped;
};

/// Folds step_hysteresis over the trace. Non-positive pressures leave the
/// register untouched and yield an invalid point with q = 0 and f = 0.
std::vector<TracePoint> simulate_trace(const FluteModel& model, double base_pitch,
                                       std::span<const double> pressure_trace,
                                       HysteresisState initial = {});

/// Reference constants for the six-hole recorder (meta line and threshold
/// lines) with common_slope = 1.0. The common slope was never measured for
/// this set; refit from data before trusting bend predictions.
FluteModel reference_model();

}  // namespace flutekit
