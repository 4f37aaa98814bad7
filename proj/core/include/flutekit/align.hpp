#pragma once

// Integer-hop alignment of the pressure array against the audio features,
// driven by the impulse trains played at the start of a session.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flutekit/features.hpp"

namespace flutekit {

struct OnsetList {
  std::vector<int> hops;  // strictly increasing
};

struct AlignParams {
  double rel_threshold = 0.3;
  int max_lag = 400;
  int min_gap = 3;          // debounce between onsets, hops
  int drift_search = 12;    // half-width of the late-attack search window, hops
};

struct AlignmentResult {
  int offset_hops = 0;  // pressure lags audio by this many hops
  double score = 0.0;   // matched / sqrt(|audio| * |pressure|)
  int matched = 0;
  int reference_end_hop = 0;  // last audio onset that took part in the match
  std::optional<int> drift_hops;
};

/// Upward crossings of rel_threshold * max(signal), at least min_gap hops
/// apart. Empty when the signal has no positive maximum.
OnsetList detect_onsets(std::span<const double> signal, double rel_threshold, int min_gap = 3);

/// Offset maximizing the count of onsets paired within one hop after
/// shifting. Ties go to the smaller summed residual, then to the smaller
/// |offset|. Throws Error(alignment) when nothing pairs within max_lag.
AlignmentResult estimate_offset(const OnsetList& audio, const OnsetList& pressure, int max_lag);

/// First difference with out[0] = 0.
std::vector<double> first_difference(std::span<const double> signal);

struct DriftCheck {
  std::optional<int> drift_hops;
  std::string warning;
};

/// Re-measures the offset on the last two note attacks after the impulse
/// region and reports late offset minus the impulse-based offset.
DriftCheck check_drift(const FeatureTable& table, const AlignmentResult& result,
                       const AlignParams& params = {});

/// Shifts the pressure column so that record k takes the pressure logged at
/// k + offset; out-of-range hops hold the boundary value.
FeatureTable apply_offset(const FeatureTable& table, int offset_hops);

/// Onsets on amplitude and on the pressure first difference, then offset and
/// drift together.
AlignmentResult align_session(const FeatureTable& table, const AlignParams& params = {});

}  // namespace flutekit
