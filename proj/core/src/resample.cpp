#include <algorithm>
#include <cmath>
#include <numbers>

#include "flutekit/error.hpp"
#include "flutekit/ingest.hpp"

namespace flutekit {

namespace {

// Kaiser-windowed sinc with 32 zero crossings per side at the output band
// edge. beta = 8.6 gives roughly 90 dB stopband.
constexpr int kZeroCrossings = 32;
constexpr double kBeta = 8.6;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Kaiser window sampled on r in [0, 1], one guard entry past the end.
constexpr std::size_t kTableSize = 4096;

std::vector<double> kaiser_table() {
  std::vector<double> t(kTableSize + 1);
  const double norm = std::cyl_bessel_i(0.0, kBeta);
  for (std::size_t i = 0; i <= kTableSize; ++i) {
    const double r = static_cast<double>(i) / kTableSize;
    t[i] = std::cyl_bessel_i(0.0, kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
  }
  return t;
}

}  // namespace

std::vector<double> resample_sinc(std::span<const double> input, double in_rate,
                                  double out_rate) {
  if (!(in_rate > 0.0) || !(out_rate > 0.0)) throw_input("resample: rates must be positive");
  if (input.empty()) return {};
  if (in_rate == out_rate) return {input.begin(), input.end()};

  // Cutoff relative to the input Nyquist; below 1 when downsampling.
  const double cutoff = std::min(1.0, out_rate / in_rate) * 0.97;
  const double half_width = kZeroCrossings / cutoff;  // in input samples
  const std::vector<double> window = kaiser_table();

  const auto n_out = static_cast<std::size_t>(
      std::floor(static_cast<double>(input.size()) * out_rate / in_rate));
  std::vector<double> out(n_out);
  const auto n_in = static_cast<std::ptrdiff_t>(input.size());

  for (std::size_t i = 0; i < n_out; ++i) {
    const double x = static_cast<double>(i) * in_rate / out_rate;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(x - half_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(x + half_width));
    double acc = 0.0;
    for (std::ptrdiff_t n = std::max<std::ptrdiff_t>(lo, 0); n <= std::min(hi, n_in - 1); ++n) {
      const double d = x - static_cast<double>(n);
      const double pos = std::abs(d) / half_width * kTableSize;
      const auto idx = static_cast<std::size_t>(pos);
      if (idx >= kTableSize) continue;
      const double frac = pos - static_cast<double>(idx);
      const double w = window[idx] + frac * (window[idx + 1] - window[idx]);
      acc += input[static_cast<std::size_t>(n)] * cutoff * sinc(cutoff * d) * w;
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace flutekit
