#pragma once

// Pressure log and audio ingestion onto a fixed-rate hop grid.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flutekit {

/// One reading from the pressure rig. `t_ms` is elapsed time since the log
/// started; `p_pa` is absolute (pre-zeroing) pressure.
struct PressureSample {
  double t_ms = 0.0;
  double p_pa = 0.0;
};

/// Irregularly time-coded pressure readings, timestamps non-decreasing.
struct PressureSeries {
  std::vector<PressureSample> samples;
};

/// Analysis grid shared by audio pages and the resampled pressure array.
struct HopGrid {
  double sample_rate = 22050.0;
  int hop = 512;
  int window = 2048;

  double hop_rate() const { return sample_rate / hop; }
  double hop_period_s() const { return hop / sample_rate; }
  double hop_time_s(std::int64_t k) const { return static_cast<double>(k) * hop / sample_rate; }

  /// Number of full pages that fit in `n_samples`; 0 when shorter than a window.
  std::size_t page_count(std::size_t n_samples) const;

  /// Throws Error(input) unless window >= hop > 0 and sample_rate > 0.
  void validate() const;
};

struct AudioBuffer {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  double rate = 0.0;
};

// Pressure log: UTF-8 CSV, header exactly `t_ms,p_pa`, LF or CRLF.
PressureSeries parse_pressure_log(std::string_view text);
std::string serialize_pressure_log(const PressureSeries& series);

/// Linearly interpolates the series at t = k * hop / sample_rate for k in
/// [0, n_hops). Hops outside the logged span hold the nearest boundary value.
std::vector<double> resample_pressure(const PressureSeries& series, const HopGrid& grid,
                                      std::size_t n_hops);

/// Decodes a RIFF WAV (PCM16 or float32, any channel count) to a mono buffer
/// at its native rate. Channels are averaged.
AudioBuffer decode_wav(std::string_view bytes);

/// 16-bit PCM mono WAV; samples are clipped to [-1, 1].
std::string encode_wav_pcm16(const AudioBuffer& audio);

/// Band-limited windowed-sinc resampling.
std::vector<double> resample_sinc(std::span<const double> input, double in_rate,
                                  double out_rate);

/// decode_wav followed by resampling to grid.sample_rate when the rates differ.
AudioBuffer load_audio(std::string_view bytes, const HopGrid& grid);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace flutekit
