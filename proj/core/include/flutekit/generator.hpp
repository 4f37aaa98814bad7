#pragma once

// Synthetic recording sessions: a scripted player drives a FluteModel and
// produces the same two files the real rig does (audio WAV and pressure
// log), plus a ground-truth record used by tests.
//
// Clock convention: the physical time tau of pressure-array hop k equals the
// centre of audio page k, so an injected lag of L hops makes the pressure
// onsets land L hops after the audio onsets.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flutekit/fit.hpp"
#include "flutekit/ingest.hpp"

namespace flutekit {

struct NoteEntry {
  int base_pitch_midi = 72;
  int repetitions = 4;
  double apex_ratio = 1.35;  // apex pressure over the fingering's up threshold
  double rise_s = 2.5;
  double fall_s = 2.5;
  double rest_s = 1.0;
};

struct ImpulseSpec {
  int groups = 2;
  int per_group = 5;
  double spacing_s = 0.3;
  double group_gap_s = 1.0;
  double pressure_pa = 400.0;
  double hold_s = 0.12;
  double pitch_midi = 84.0;
  double amplitude = 0.9;
};

struct SessionScript {
  std::vector<NoteEntry> notes;
  bool preamble = true;
  ImpulseSpec impulses;

  double lead_s = 1.0;
  double preamble_rest_s = 1.0;
  double tail_s = 1.0;

  double attack_s = 0.035;      // breath ramp at note/impulse start and end
  double start_u = 0.8;         // q^power at the end of the attack ramp
  double voice_fraction = 0.74; // sounding once P reaches this share of the attack target
  double note_amplitude = 0.3;
  double fade_s = 0.003;

  double perturb_semitones = -0.6;  // pitch disturbance right after a jump
  double perturb_s = 0.2;

  double baseline_pa = 101300.0;
  double pressure_noise_pa = 0.5;
  double audio_noise = 1e-3;
  double log_interval_min_ms = 5.0;
  double log_interval_max_ms = 15.0;

  int lag_hops = 0;
  double drift_hops = 0.0;  // pressure clock gain over the whole session
  std::uint64_t seed = 1;
};

/// Seven fingerings of a C recorder (C5..B5) four times each, preamble on.
SessionScript default_script();

struct TruthNote {
  int id = 0;
  int base_pitch_midi = 0;
  int repetition = 0;
  double voiced_start_hop = 0.0;  // fractional hop positions on the audio grid
  double voiced_end_hop = 0.0;
  double apex_hop = 0.0;
  double up_threshold_pa = 0.0;
  double down_threshold_pa = 0.0;
  double apex_pa = 0.0;
};

struct TruthJump {
  int note_id = 0;
  double hop = 0.0;
  Direction direction = Direction::up;
  double pressure_pa = 0.0;
};

struct GroundTruth {
  double baseline_pa = 0.0;
  int lag_hops = 0;
  double drift_hops = 0.0;
  std::vector<double> impulse_hops;  // impulse attack starts
  std::vector<std::pair<double, double>> impulse_voiced;  // [start, end) hops
  std::vector<TruthNote> notes;
  std::vector<TruthJump> jumps;
  std::size_t audio_samples = 0;
};

struct SessionFiles {
  std::string wav;
  std::string pressure_csv;
  GroundTruth truth;
};

/// Throws Error(input) on an inconsistent script (non-positive durations,
/// apex below the up threshold, attack target above the down threshold).
SessionFiles generate_session(const SessionScript& script, const FluteModel& model,
                              const HopGrid& grid = {});

std::string serialize_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::string_view json);
std::string serialize_script(const SessionScript& script);
SessionScript parse_script(std::string_view json);

}  // namespace flutekit
