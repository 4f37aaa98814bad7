#include "flutekit/model.hpp"

#include <fmt/format.h>

#include <cmath>

#include "flutekit/error.hpp"

namespace flutekit {

double midi_to_hz(double pitch_midi) { return 440.0 * std::exp2((pitch_midi - 69.0) / 12.0); }

double x_intercept_at(const FluteModel& model, double sounding_pitch) {
  return model.bend.meta_slope * sounding_pitch + model.bend.meta_intercept;
}

BendResult bend_at(const FluteModel& model, double sounding_pitch, double gauge_pressure) {
  if (!(gauge_pressure > 0.0))
    throw_input(fmt::format("bend_at: gauge pressure must be positive, got {}", gauge_pressure));
  const double u =
      1.0 + model.bend.common_slope * (std::log(gauge_pressure) - x_intercept_at(model, sounding_pitch));
  BendResult r;
  if (u <= 0.0) {
    r.valid = false;
    r.q = std::pow(kBelowSpeakingFloor, 1.0 / model.bend.power);
  } else {
    r.q = std::pow(u, 1.0 / model.bend.power);
  }
  r.bend = 12.0 * std::log2(r.q);
  return r;
}

double up_threshold_pa(const FluteModel& model, double base_pitch) {
  return std::exp(model.thresholds.slope * base_pitch + model.thresholds.up_intercept);
}

double down_threshold_pa(const FluteModel& model, double base_pitch) {
  return std::exp(model.thresholds.slope * base_pitch + model.thresholds.down_intercept);
}

StepResult step_hysteresis(const FluteModel& model, HysteresisState state, double base_pitch,
                           double gauge_pressure) {
  StepResult r{state, std::nullopt};
  if (state.reg == Register::low && gauge_pressure > up_threshold_pa(model, base_pitch)) {
    r.state.reg = Register::high;
    r.jumped = Direction::up;
  } else if (state.reg == Register::high && gauge_pressure < down_threshold_pa(model, base_pitch)) {
    r.state.reg = Register::low;
    r.jumped = Direction::down;
  }
  return r;
}

std::vector<TracePoint> simulate_trace(const FluteModel& model, double base_pitch,
                                       std::span<const double> pressure_trace,
                                       HysteresisState initial) {
  std::vector<TracePoint> out;
  out.reserve(pressure_trace.size());
  HysteresisState state = initial;
  for (double p : pressure_trace) {
    TracePoint t;
    if (p > 0.0) {
      const auto step = step_hysteresis(model, state, base_pitch, p);
      state = step.state;
      t.jumped = step.jumped;
    }
    t.reg = state.reg;
    t.sounding_pitch = base_pitch + (state.reg == Register::high ? 12.0 : 0.0);
    if (p > 0.0) {
      const auto b = bend_at(model, t.sounding_pitch, p);
      t.q = b.q;
      t.bend = b.bend;
      t.valid = b.valid;
      t.f_hz = midi_to_hz(t.sounding_pitch) * b.q;
    } else {
      t.q = 0.0;
      t.bend = 0.0;
      t.valid = false;
      t.f_hz = 0.0;
    }
    out.push_back(t);
  }
  return out;
}

FluteModel reference_model() {
  FluteModel m;
  m.bend.power = 10.0;
  m.bend.common_slope = 1.0;
  m.bend.meta_slope = 0.09498625513471028;
  m.bend.meta_intercept = -3.177222804229106;
  m.thresholds.slope = 0.12067771159663639;
  m.thresholds.up_intercept = -3.0908617599208004;
  m.thresholds.down_intercept = -3.289717945484731;
  return m;
}

}  // namespace flutekit
