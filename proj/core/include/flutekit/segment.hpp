#pragma once

// Atmospheric zeroing, note/sweep segmentation, octave-jump detection and
// removal of silent and disequilibrium hops.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flutekit/features.hpp"

namespace flutekit {

struct SegmentParams {
  double silence_threshold = 0.02;  // fraction of session max amplitude
  double min_note_ms = 500.0;
  double jump_semitones = 6.0;
  double disequilibrium_ms = 300.0;
  int smoothing_hops = 5;
  int min_silent_hops = 10;
};

enum class Direction { up, down };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view s);

struct NoteSegment {
  int id = 0;
  int start = 0;  // [start, end) in hops
  int end = 0;
  int base_pitch_midi = 0;  // lower-octave in-tune pitch of the fingering
  int repetition = 0;       // ordinal among segments sharing base_pitch_midi

  int length() const { return end - start; }
  bool contains(int hop) const { return hop >= start && hop < end; }
};

struct Sweep {
  int note_id = 0;
  Direction direction = Direction::up;
  int start = 0;  // [start, end), may be empty
  int end = 0;

  bool contains(int hop) const { return hop >= start && hop < end; }
};

struct JumpEvent {
  int note_id = 0;
  int hop = 0;  // first hop after the jump
  Direction direction = Direction::up;
  std::optional<double> ln_pressure;  // absent when a bracketing pressure is <= 0
  std::optional<int> prev_hop;        // last voiced hop before the jump; hop - 1 if unset
};

/// Silent = unvoiced or amplitude below amp_threshold * max amplitude.
std::vector<bool> detect_silence(const FeatureTable& table, double amp_threshold);

/// Sets discard=silent and clears voiced on flagged hops.
FeatureTable mark_silence(const FeatureTable& table, const std::vector<bool>& silent);

/// Subtracts the median pressure over silent hops and records it as the
/// baseline. Throws Error(input) without enough silent hops or when the
/// audio carries no signal at all.
FeatureTable zero_pressure(const FeatureTable& table, const SegmentParams& params = {});

/// Maximal non-silent runs of at least min_note_ms. Base pitch comes from
/// `fingerings` (one per segment, in order) when given, otherwise from the
/// mode of rounded pitch over the run's lower-octave hops.
std::vector<NoteSegment> segment_notes(const FeatureTable& table, const SegmentParams& params = {},
                                       std::span<const int> fingerings = {});

std::vector<JumpEvent> detect_octave_jumps(const FeatureTable& table,
                                           std::span<const NoteSegment> segments,
                                           const SegmentParams& params = {});

/// ceil(window_ms / 1000 * hop_rate); 13 at the default grid.
int disequilibrium_window_hops(const HopGrid& grid, double window_ms);

/// Each page spans window/hop hops around its index, so the acoustic jump lies
/// somewhere in [prev_hop - half page, hop + half page]. Flags that span
/// widened by the disequilibrium window on both sides.
FeatureTable discard_disequilibrium(const FeatureTable& table, std::span<const JumpEvent> events,
                                    double window_ms = 300.0);

/// Two sweeps per segment split after the hop of maximum smoothed pressure:
/// up = [start, apex], down = (apex, end).
std::vector<Sweep> tag_sweeps(const FeatureTable& table, std::span<const NoteSegment> segments,
                              int smoothing_hops = 5);

/// Index into `segments` of the one containing `hop`.
std::optional<std::size_t> find_segment(std::span<const NoteSegment> segments, int hop);

}  // namespace flutekit
