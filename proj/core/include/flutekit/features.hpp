#pragma once

// Per-hop analysis: YIN f0, periodogram amplitude, pitch, joined with the
// resampled pressure array.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flutekit/ingest.hpp"

namespace flutekit {

struct YinParams {
  double f_min = 200.0;
  double f_max = 3000.0;
  double threshold = 0.1;
};

/// YIN estimate for one page: difference function, cumulative-mean
/// normalization, first dip below `threshold`, parabolic refinement of the
/// lag. Returns nullopt when no dip qualifies or the estimate leaves
/// [f_min, f_max].
std::optional<double> yin_f0(std::span<const double> page, double rate,
                             const YinParams& params = {});

/// Rectangular-window periodogram normalized so its bins sum to the page
/// energy (sum of x^2). Owns an FFTW plan; not safe to share across threads.
class Periodogram {
 public:
  explicit Periodogram(std::size_t size);
  ~Periodogram();
  Periodogram(const Periodogram&) = delete;
  Periodogram& operator=(const Periodogram&) = delete;
  Periodogram(Periodogram&&) noexcept;
  Periodogram& operator=(Periodogram&&) noexcept;

  std::size_t size() const { return size_; }

  /// One-sided spectrum, size()/2 + 1 bins.
  std::vector<double> compute(std::span<const double> page);

  /// Sum of the periodogram divided by the page size.
  double amplitude(std::span<const double> page);

 private:
  struct Plan;
  std::size_t size_;
  std::unique_ptr<Plan> plan_;
};

/// Mean-square page energy computed through the periodogram.
double page_amplitude(std::span<const double> page);

/// 69 + 12 log2(f / 440). Throws Error(input) for f <= 0.
double hz_to_midi(double f_hz);

enum class DiscardReason { none, silent, disequilibrium };

std::string_view to_string(DiscardReason reason);
DiscardReason parse_discard_reason(std::string_view s);

struct HopRecord {
  std::int64_t index = 0;
  double time_s = 0.0;
  std::optional<double> pressure_pa;
  std::optional<double> f0_hz;
  std::optional<double> pitch_midi;
  double amplitude = 0.0;
  bool voiced = false;
  DiscardReason discard = DiscardReason::none;

  bool retained() const { return voiced && discard == DiscardReason::none; }
};

struct TableMeta {
  std::optional<int> offset_hops;
  std::optional<double> baseline_pa;
};

struct FeatureTable {
  HopGrid grid;
  std::vector<HopRecord> records;
  TableMeta meta;

  std::size_t size() const { return records.size(); }
  std::vector<double> amplitudes() const;
  /// Absent pressures read as 0.
  std::vector<double> pressures() const;
  double max_amplitude() const;
};

/// One record per full page. Pressure is resampled to the same hop count;
/// baseline is not subtracted yet.
FeatureTable extract_features(const AudioBuffer& audio, const PressureSeries& pressure,
                              const HopGrid& grid, const YinParams& yin = {});

// CSV header `index,time_s,pressure_pa,f0_hz,pitch_midi,amplitude,voiced,discard`.
std::string serialize_features_csv(const FeatureTable& table);
FeatureTable parse_features_csv(std::string_view text, const HopGrid& grid);

}  // namespace flutekit
