#include "flutekit/segment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "flutekit/error.hpp"

namespace flutekit {

std::string_view to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

Direction parse_direction(std::string_view s) {
  if (s == "up") return Direction::up;
  if (s == "down") return Direction::down;
  throw_input(fmt::format("direction must be 'up' or 'down', got '{}'", s));
}

std::vector<bool> detect_silence(const FeatureTable& table, double amp_threshold) {
  const double thr = amp_threshold * table.max_amplitude();
  std::vector<bool> silent(table.records.size());
  for (std::size_t k = 0; k < table.records.size(); ++k) {
    const auto& r = table.records[k];
    silent[k] = !r.voiced || r.amplitude < thr || r.discard == DiscardReason::silent;
  }
  return silent;
}

FeatureTable mark_silence(const FeatureTable& table, const std::vector<bool>& silent) {
  if (silent.size() != table.records.size()) throw_input("mark_silence: flag count mismatch");
  FeatureTable out = table;
  for (std::size_t k = 0; k < silent.size(); ++k) {
    if (!silent[k]) continue;
    out.records[k].discard = DiscardReason::silent;
    out.records[k].voiced = false;
  }
  return out;
}

FeatureTable zero_pressure(const FeatureTable& table, const SegmentParams& params) {
  if (table.records.empty()) throw_input("cannot estimate atmosphere: empty table");
  if (!(table.max_amplitude() > 0.0))
    throw_input("cannot estimate atmosphere: audio carries no signal to separate silence from");

  const auto silent = detect_silence(table, params.silence_threshold);
  std::vector<double> quiet;
  for (std::size_t k = 0; k < silent.size(); ++k)
    if (silent[k] && table.records[k].pressure_pa) quiet.push_back(*table.records[k].pressure_pa);
  if (quiet.size() < static_cast<std::size_t>(std::max(1, params.min_silent_hops)))
    throw_input(fmt::format("cannot estimate atmosphere: {} silent hops, need {}", quiet.size(),
                            params.min_silent_hops));

  const std::size_t mid = quiet.size() / 2;
  std::nth_element(quiet.begin(), quiet.begin() + static_cast<long>(mid), quiet.end());
  double baseline = quiet[mid];
  if (quiet.size() % 2 == 0) {
    const double lower = *std::max_element(quiet.begin(), quiet.begin() + static_cast<long>(mid));
    baseline = 0.5 * (baseline + lower);
  }

  FeatureTable out = table;
  for (auto& r : out.records)
    if (r.pressure_pa) *r.pressure_pa -= baseline;
  out.meta.baseline_pa = table.meta.baseline_pa.value_or(0.0) + baseline;
  return out;
}

namespace {

int infer_base_pitch(const FeatureTable& table, int start, int end) {
  std::vector<double> pitches;
  for (int k = start; k < end; ++k) {
    const auto& r = table.records[static_cast<std::size_t>(k)];
    if (r.voiced && r.pitch_midi) pitches.push_back(*r.pitch_midi);
  }
  if (pitches.empty()) return 0;
  auto sorted = pitches;
  std::sort(sorted.begin(), sorted.end());
  const double floor_pitch = sorted[sorted.size() / 10];

  std::map<long, int> counts;
  for (double p : pitches)
    if (p < floor_pitch + 6.0) ++counts[std::lround(p)];
  long best = counts.begin()->first;
  int best_n = 0;
  for (const auto& [pitch, n] : counts) {
    if (n > best_n) {
      best = pitch;
      best_n = n;
    }
  }
  return static_cast<int>(best);
}

}  // namespace

std::vector<NoteSegment> segment_notes(const FeatureTable& table, const SegmentParams& params,
                                       std::span<const int> fingerings) {
  const int min_hops =
      static_cast<int>(std::ceil(params.min_note_ms / 1000.0 * table.grid.hop_rate() - 1e-9));
  const int n = static_cast<int>(table.records.size());

  std::vector<NoteSegment> segments;
  int k = 0;
  while (k < n) {
    const auto sounding = [&](int i) {
      const auto& r = table.records[static_cast<std::size_t>(i)];
      return r.voiced && r.discard != DiscardReason::silent;
    };
    if (!sounding(k)) {
      ++k;
      continue;
    }
    const int start = k;
    while (k < n && sounding(k)) ++k;
    if (k - start >= min_hops) {
      NoteSegment s;
      s.id = static_cast<int>(segments.size());
      s.start = start;
      s.end = k;
      segments.push_back(s);
    }
  }

  if (!fingerings.empty() && fingerings.size() != segments.size())
    throw_input(fmt::format("segment_notes: {} fingerings given for {} detected notes",
                            fingerings.size(), segments.size()));

  std::map<int, int> reps;
  for (auto& s : segments) {
    s.base_pitch_midi = fingerings.empty() ? infer_base_pitch(table, s.start, s.end)
                                           : fingerings[static_cast<std::size_t>(s.id)];
    s.repetition = reps[s.base_pitch_midi]++;
  }
  return segments;
}

std::vector<JumpEvent> detect_octave_jumps(const FeatureTable& table,
                                           std::span<const NoteSegment> segments,
                                           const SegmentParams& params) {
  std::vector<JumpEvent> events;
  for (const auto& s : segments) {
    std::optional<int> prev;
    for (int k = s.start; k < s.end; ++k) {
      const auto& r = table.records[static_cast<std::size_t>(k)];
      if (!r.voiced || !r.pitch_midi || r.discard == DiscardReason::silent) continue;
      if (prev) {
        const auto& q = table.records[static_cast<std::size_t>(*prev)];
        const double step = *r.pitch_midi - *q.pitch_midi;
        if (std::abs(step) >= params.jump_semitones) {
          JumpEvent e;
          e.note_id = s.id;
          e.hop = k;
          e.direction = step > 0 ? Direction::up : Direction::down;
          const double a = q.pressure_pa.value_or(0.0);
          const double b = r.pressure_pa.value_or(0.0);
          if (a > 0.0 && b > 0.0) e.ln_pressure = 0.5 * (std::log(a) + std::log(b));
          e.prev_hop = *prev;
          events.push_back(e);
        }
      }
      prev = k;
    }
  }
  return events;
}

int disequilibrium_window_hops(const HopGrid& grid, double window_ms) {
  return static_cast<int>(std::ceil(window_ms / 1000.0 * grid.hop_rate()));
}

FeatureTable discard_disequilibrium(const FeatureTable& table, std::span<const JumpEvent> events,
                                    double window_ms) {
  FeatureTable out = table;
  const int w = disequilibrium_window_hops(table.grid, window_ms);
  const int half_page = (table.grid.window + 2 * table.grid.hop - 1) / (2 * table.grid.hop);
  const int n = static_cast<int>(table.records.size());
  for (const auto& e : events) {
    const int lo = e.prev_hop.value_or(e.hop - 1) - half_page - w;
    const int hi = e.hop + half_page + w;
    for (int k = std::max(0, lo); k <= std::min(n - 1, hi); ++k) {
      auto& r = out.records[static_cast<std::size_t>(k)];
      if (r.discard == DiscardReason::none) r.discard = DiscardReason::disequilibrium;
    }
  }
  return out;
}

std::vector<Sweep> tag_sweeps(const FeatureTable& table, std::span<const NoteSegment> segments,
                              int smoothing_hops) {
  std::vector<Sweep> sweeps;
  const int half = std::max(0, smoothing_hops / 2);
  for (const auto& s : segments) {
    int apex = s.start;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = s.start; k < s.end; ++k) {
      const int lo = std::max(s.start, k - half);
      const int hi = std::min(s.end - 1, k + half);
      double acc = 0.0;
      for (int i = lo; i <= hi; ++i)
        acc += table.records[static_cast<std::size_t>(i)].pressure_pa.value_or(0.0);
      const double avg = acc / (hi - lo + 1);
      if (avg > best) {
        best = avg;
        apex = k;
      }
    }
    sweeps.push_back({s.id, Direction::up, s.start, apex + 1});
    sweeps.push_back({s.id, Direction::down, apex + 1, s.end});
  }
  return sweeps;
}

std::optional<std::size_t> find_segment(std::span<const NoteSegment> segments, int hop) {
  const auto it = std::upper_bound(segments.begin(), segments.end(), hop,
                                   [](int h, const NoteSegment& s) { return h < s.end; });
  if (it == segments.end() || !it->contains(hop)) return std::nullopt;
  return static_cast<std::size_t>(it - segments.begin());
}

}  // namespace flutekit
