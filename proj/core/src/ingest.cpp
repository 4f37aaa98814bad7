#include "flutekit/ingest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "flutekit/error.hpp"

namespace flutekit {

std::size_t HopGrid::page_count(std::size_t n_samples) const {
  const auto w = static_cast<std::size_t>(window);
  if (n_samples < w) return 0;
  return (n_samples - w) / static_cast<std::size_t>(hop) + 1;
}

void HopGrid::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw_input("hop grid: sample rate must be positive");
  if (hop <= 0 || window < hop)
    throw_input(fmt::format("hop grid: need window >= hop > 0 (hop {}, window {})", hop, window));
}

namespace {

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

PressureSeries parse_pressure_log(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  PressureSeries series;
  std::size_t row = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim_cr(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++row;

    if (!header_seen) {
      if (line != "t_ms,p_pa")
        throw_input(fmt::format("pressure log: expected header 't_ms,p_pa', got '{}'", line));
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto comma = line.find(',');
    PressureSample s;
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos ||
        !parse_double(line.substr(0, comma), s.t_ms) ||
        !parse_double(line.substr(comma + 1), s.p_pa))
      throw_input(fmt::format("pressure log: malformed row {}", row));
    if (!std::isfinite(s.t_ms) || s.t_ms < 0.0)
      throw_input(fmt::format("pressure log: invalid timestamp at row {}", row));
    if (!std::isfinite(s.p_pa) || s.p_pa <= 0.0)
      throw_input(fmt::format("pressure log: non-positive pressure at row {}", row));
    if (!series.samples.empty() && s.t_ms < series.samples.back().t_ms)
      throw_input(fmt::format("pressure log: decreasing timestamp at row {}", row));
    series.samples.push_back(s);
  }
  if (!header_seen) throw_input("pressure log: empty file");
  if (series.samples.size() < 2)
    throw_input(fmt::format("pressure log: need at least 2 samples, got {}", series.samples.size()));
  return series;
}

std::string serialize_pressure_log(const PressureSeries& series) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "t_ms,p_pa\n");
  for (const auto& s : series.samples) fmt::format_to(std::back_inserter(out), "{},{}\n", s.t_ms, s.p_pa);
  return fmt::to_string(out);
}

std::vector<double> resample_pressure(const PressureSeries& series, const HopGrid& grid,
                                      std::size_t n_hops) {
  const auto& s = series.samples;
  if (s.size() < 2) throw_input("resample_pressure: need at least 2 samples");
  if (n_hops == 0) throw_input("resample_pressure: n_hops must be >= 1");

  std::vector<double> out(n_hops);
  std::size_t j = 0;  // s[j].t_ms <= t < s[j + 1].t_ms once inside the span
  for (std::size_t k = 0; k < n_hops; ++k) {
    const double t = static_cast<double>(k) * grid.hop * 1000.0 / grid.sample_rate;
    if (t <= s.front().t_ms) {
      out[k] = s.front().p_pa;
      continue;
    }
    if (t >= s.back().t_ms) {
      out[k] = s.back().p_pa;
      continue;
    }
    while (j + 1 < s.size() && s[j + 1].t_ms <= t) ++j;
    const auto& a = s[j];
    const auto& b = s[j + 1];
    const double span = b.t_ms - a.t_ms;
    // span > 0 here: a.t_ms <= t < b.t_ms
    const double w = (t - a.t_ms) / span;
    out[k] = a.p_pa + w * (b.p_pa - a.p_pa);
  }
  return out;
}

AudioBuffer load_audio(std::string_view bytes, const HopGrid& grid) {
  grid.validate();
  AudioBuffer audio = decode_wav(bytes);
  if (audio.rate != grid.sample_rate) {
    audio.samples = resample_sinc(audio.samples, audio.rate, grid.sample_rate);
    audio.rate = grid.sample_rate;
  }
  return audio;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_input(fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw_input(fmt::format("short write to '{}'", path.string()));
}

}  // namespace flutekit
