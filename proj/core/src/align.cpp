#include "flutekit/align.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "flutekit/error.hpp"

namespace flutekit {

OnsetList detect_onsets(std::span<const double> signal, double rel_threshold, int min_gap) {
  if (signal.size() < 2) throw_input("detect_onsets: signal needs at least 2 hops");
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
    throw_input("detect_onsets: rel_threshold must lie in (0, 1)");

  OnsetList onsets;
  const double peak = *std::max_element(signal.begin(), signal.end());
  if (!(peak > 0.0)) return onsets;
  const double thr = rel_threshold * peak;
  for (std::size_t k = 1; k < signal.size(); ++k) {
    if (signal[k] >= thr && signal[k - 1] < thr) {
      const int hop = static_cast<int>(k);
      if (!onsets.hops.empty() && hop - onsets.hops.back() < min_gap) continue;
      onsets.hops.push_back(hop);
    }
  }
  return onsets;
}

namespace {

struct MatchCount {
  int matched = 0;
  long residual = 0;
  int last_audio = 0;
};

// Greedy pairing of sorted lists within a one-hop tolerance; the greedy
// earliest-partner rule is count-optimal for interval matching.
MatchCount match(const std::vector<int>& audio, const std::vector<int>& pressure, int offset) {
  MatchCount m;
  std::size_t j = 0;
  for (int a : audio) {
    const int target = a + offset;
    while (j < pressure.size() && pressure[j] < target - 1) ++j;
    if (j < pressure.size() && pressure[j] <= target + 1) {
      ++m.matched;
      m.residual += std::abs(pressure[j] - target);
      m.last_audio = a;
      ++j;
    }
  }
  return m;
}

}  // namespace

AlignmentResult estimate_offset(const OnsetList& audio, const OnsetList& pressure, int max_lag) {
  if (audio.hops.empty() || pressure.hops.empty())
    throw Error(ErrorKind::alignment, "alignment failed: no onsets detected");

  AlignmentResult best;
  MatchCount best_m;
  bool have = false;
  for (int off = -max_lag; off <= max_lag; ++off) {
    const auto m = match(audio.hops, pressure.hops, off);
    if (m.matched == 0) continue;
    const bool better =
        !have || m.matched > best_m.matched ||
        (m.matched == best_m.matched &&
         (m.residual < best_m.residual ||
          (m.residual == best_m.residual && std::abs(off) < std::abs(best.offset_hops))));
    if (better) {
      have = true;
      best_m = m;
      best.offset_hops = off;
    }
  }
  if (!have) throw Error(ErrorKind::alignment, "alignment failed: no overlap within max_lag");

  best.matched = best_m.matched;
  best.reference_end_hop = best_m.last_audio;
  best.score = best_m.matched / std::sqrt(static_cast<double>(audio.hops.size()) *
                                          static_cast<double>(pressure.hops.size()));
  return best;
}

std::vector<double> first_difference(std::span<const double> signal) {
  std::vector<double> d(signal.size(), 0.0);
  for (std::size_t k = 1; k < signal.size(); ++k) d[k] = signal[k] - signal[k - 1];
  return d;
}

DriftCheck check_drift(const FeatureTable& table, const AlignmentResult& result,
                       const AlignParams& params) {
  DriftCheck out;
  const auto amp = table.amplitudes();
  const auto dp = first_difference(table.pressures());
  const int n = static_cast<int>(amp.size());

  const int tail_start = result.reference_end_hop + params.drift_search;
  if (tail_start >= n - 2) {
    out.warning = "drift unavailable: no note attacks after the impulse region";
    return out;
  }
  auto attacks = detect_onsets(std::span(amp).subspan(static_cast<std::size_t>(tail_start)),
                               params.rel_threshold, params.min_gap);
  if (attacks.hops.size() < 2) {
    out.warning = fmt::format("drift unavailable: found {} late note attack(s), need 2",
                              attacks.hops.size());
    return out;
  }

  double late_sum = 0.0;
  int late_count = 0;
  for (auto it = attacks.hops.end() - 2; it != attacks.hops.end(); ++it) {
    const int a = *it + tail_start;
    const int lo = std::clamp(a + result.offset_hops - params.drift_search, 1, n - 1);
    const int hi = std::clamp(a + result.offset_hops + params.drift_search, 1, n - 1);
    if (lo >= hi) continue;
    const double peak = *std::max_element(dp.begin() + lo, dp.begin() + hi + 1);
    if (!(peak > 0.0)) continue;
    const double thr = params.rel_threshold * peak;
    for (int k = lo; k <= hi; ++k) {
      if (dp[k] >= thr && (k == lo || dp[k - 1] < thr)) {
        late_sum += k - a;
        ++late_count;
        break;
      }
    }
  }
  if (late_count < 2) {
    out.warning = "drift unavailable: late pressure attacks not found";
    return out;
  }
  out.drift_hops = static_cast<int>(std::lround(late_sum / late_count)) - result.offset_hops;
  return out;
}

FeatureTable apply_offset(const FeatureTable& table, int offset_hops) {
  const auto n = static_cast<long>(table.records.size());
  if (std::labs(offset_hops) >= n && n > 0)
    throw_input(fmt::format("apply_offset: |offset| {} exceeds record count {}", offset_hops, n));

  FeatureTable out = table;
  for (long k = 0; k < n; ++k) {
    const long src = std::clamp(k + offset_hops, 0L, n - 1);
    out.records[static_cast<std::size_t>(k)].pressure_pa =
        table.records[static_cast<std::size_t>(src)].pressure_pa;
  }
  out.meta.offset_hops = table.meta.offset_hops.value_or(0) + offset_hops;
  return out;
}

AlignmentResult align_session(const FeatureTable& table, const AlignParams& params) {
  const auto amp = table.amplitudes();
  const auto dp = first_difference(table.pressures());
  const auto audio_onsets = detect_onsets(amp, params.rel_threshold, params.min_gap);
  const auto pressure_onsets = detect_onsets(dp, params.rel_threshold, params.min_gap);
  auto result = estimate_offset(audio_onsets, pressure_onsets, params.max_lag);
  result.drift_hops = check_drift(table, result, params).drift_hops;
  return result;
}

}  // namespace flutekit
