#pragma once

// The 6-DoF flute model fit: a two-layer pitch-bend regression and an
// octave-threshold regression with a categorical up/down intercept.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flutekit/features.hpp"
#include "flutekit/segment.hpp"

namespace flutekit {

struct BendSample {
  double ln_pressure = 0.0;  // ln(gauge Pa)
  double q = 1.0;            // f0 over the in-tune frequency of the sounding note
  int sounding_pitch_midi = 0;
};

using BendGroups = std::map<int, std::vector<BendSample>>;  // keyed by sounding pitch

struct BendSampleSet {
  BendGroups groups;
  int excluded_nonpositive = 0;  // gauge pressure <= 0
  int excluded_edge = 0;         // page overlaps a note boundary
  int excluded_register = 0;     // pitch not within an octave register of the base

  std::size_t total() const;
};

/// Retained voiced hops inside segments, excluding `edge_margin_hops` at each
/// end of every segment (pass a negative value for window / hop).
BendSampleSet build_bend_samples(const FeatureTable& table, std::span<const NoteSegment> segments,
                                 int edge_margin_hops = -1);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using PointGroups = std::map<int, std::vector<Point>>;

/// x = ln_pressure, y = q^power - 1, so y = 0 is the in-tune crossing.
PointGroups transform_bend(const BendGroups& groups, double power);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n = 0;
  double rss = 0.0;
};

/// Ordinary least squares; nullopt when fewer than two distinct x.
std::optional<LineFit> fit_line(std::span<const Point> points);

struct PerNoteFits {
  std::map<int, LineFit> lines;
  std::vector<int> skipped;  // degenerate groups
};

PerNoteFits fit_per_note_lines(const BendGroups& groups, double power);

struct CommonSlopeFit {
  double slope = 0.0;
  std::map<int, double> intercepts;
  std::size_t n = 0;
  double rss = 0.0;
};

/// One slope shared by every group, one intercept per group. Throws
/// Error(fit_degenerate) when no group has x spread.
CommonSlopeFit fit_common_slope(const PointGroups& groups);

/// (pitch, -intercept / slope). Throws Error(fit_degenerate) for slope 0.
std::vector<std::pair<int, double>> x_intercepts(double slope,
                                                 const std::map<int, double>& intercepts);

/// OLS of x-intercept on pitch. Throws Error(fit_degenerate) with fewer than
/// two distinct pitches.
LineFit fit_meta_line(std::span<const std::pair<int, double>> pairs);

struct BendModel {
  double power = 10.0;
  double common_slope = 1.0;     // per-note slope in (ln Pa) -> q^power space
  double meta_slope = 0.0;       // ln Pa per semitone
  double meta_intercept = 0.0;   // ln Pa
};

struct BendFitReport {
  BendModel model;
  PerNoteFits per_note;
  CommonSlopeFit common;
  std::vector<std::pair<int, double>> x_intercepts;
  int excluded_nonpositive = 0;
  int excluded_edge = 0;
  int excluded_register = 0;
};

BendFitReport fit_bend_model(const BendSampleSet& samples, double power = 10.0);

enum class LabelSource { automatic, manual };

std::string_view to_string(LabelSource s);
LabelSource parse_label_source(std::string_view s);

struct ThresholdLabel {
  int note_id = 0;
  int pitch_midi = 0;  // base pitch of the fingering
  Direction direction = Direction::up;
  double ln_pressure = 0.0;
  LabelSource source = LabelSource::automatic;
};

/// Up events inside up-sweeps and down events inside down-sweeps become
/// labels at the segment's base pitch. Events without a valid pressure are
/// skipped.
std::vector<ThresholdLabel> auto_label_thresholds(std::span<const JumpEvent> events,
                                                  std::span<const NoteSegment> segments,
                                                  std::span<const Sweep> sweeps);

/// Manual labels replace automatic ones for the same (note_id, direction).
std::vector<ThresholdLabel> merge_labels(std::span<const ThresholdLabel> automatic,
                                         std::span<const ThresholdLabel> manual);

/// ln P_threshold = slope * pitch + intercept(direction).
struct ThresholdModel {
  double slope = 0.0;
  double up_intercept = 0.0;
  double down_intercept = 0.0;
};

ThresholdModel fit_threshold_model(std::span<const ThresholdLabel> labels);

struct FluteModel {
  BendModel bend;
  ThresholdModel thresholds;

  /// Throws Error(invalid_model) on a non-positive power or an inverted
  /// hysteresis band (down_intercept >= up_intercept).
  void validate() const;
};

FluteModel assemble_model(const BendModel& bend, const ThresholdModel& thresholds);

// Model file: JSON with keys power, common_slope, meta_slope, meta_intercept,
// thr_slope, thr_up_intercept, thr_down_intercept, pitch_convention,
// pressure_convention.
std::string serialize_model(const FluteModel& model);
FluteModel parse_model(std::string_view json);

// Labels file: JSON array of {note_id, pitch_midi, direction, ln_pressure, source}.
std::string serialize_labels(std::span<const ThresholdLabel> labels);
std::vector<ThresholdLabel> parse_labels(std::string_view json);

}  // namespace flutekit
