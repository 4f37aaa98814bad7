#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>

#include "flutekit/error.hpp"
#include "flutekit/features.hpp"

namespace flutekit {

double hz_to_midi(double f_hz) {
  if (!(f_hz > 0.0) || !std::isfinite(f_hz))
    throw_input(fmt::format("hz_to_midi: frequency must be positive, got {}", f_hz));
  return 69.0 + 12.0 * std::log2(f_hz / 440.0);
}

std::string_view to_string(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::none: return "none";
    case DiscardReason::silent: return "silent";
    case DiscardReason::disequilibrium: return "disequilibrium";
  }
  return "none";
}

DiscardReason parse_discard_reason(std::string_view s) {
  if (s == "none" || s.empty()) return DiscardReason::none;
  if (s == "silent") return DiscardReason::silent;
  if (s == "disequilibrium") return DiscardReason::disequilibrium;
  throw_input(fmt::format("unknown discard reason '{}'", s));
}

std::vector<double> FeatureTable::amplitudes() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.amplitude);
  return out;
}

std::vector<double> FeatureTable::pressures() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pressure_pa.value_or(0.0));
  return out;
}

double FeatureTable::max_amplitude() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.amplitude);
  return m;
}

FeatureTable extract_features(const AudioBuffer& audio, const PressureSeries& pressure,
                              const HopGrid& grid, const YinParams& yin) {
  grid.validate();
  if (audio.rate != grid.sample_rate)
    throw_input(fmt::format("extract_features: audio at {} Hz, grid expects {} Hz", audio.rate,
                            grid.sample_rate));
  const std::size_t n_pages = grid.page_count(audio.samples.size());
  if (n_pages == 0) throw_input("extract_features: audio shorter than one analysis window");

  const auto p = resample_pressure(pressure, grid, n_pages);
  Periodogram periodogram(static_cast<std::size_t>(grid.window));

  FeatureTable table;
  table.grid = grid;
  table.records.resize(n_pages);
  const std::span<const double> samples(audio.samples);
  for (std::size_t k = 0; k < n_pages; ++k) {
    const auto page = samples.subspan(k * static_cast<std::size_t>(grid.hop),
                                      static_cast<std::size_t>(grid.window));
    auto& r = table.records[k];
    r.index = static_cast<std::int64_t>(k);
    r.time_s = grid.hop_time_s(r.index);
    r.pressure_pa = p[k];
    r.amplitude = periodogram.amplitude(page);
    if (const auto f0 = yin_f0(page, grid.sample_rate, yin)) {
      r.f0_hz = *f0;
      r.pitch_midi = hz_to_midi(*f0);
      r.voiced = true;
    }
  }
  return table;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

std::optional<double> parse_opt(std::string_view s, std::size_t row) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw_input(fmt::format("features csv: bad number '{}' at row {}", s, row));
  return v;
}

constexpr std::string_view kFeatureHeader =
    "index,time_s,pressure_pa,f0_hz,pitch_midi,amplitude,voiced,discard";

}  // namespace

std::string serialize_features_csv(const FeatureTable& table) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{}\n", kFeatureHeader);
  for (const auto& r : table.records)
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", r.index, r.time_s,
                   fmt_opt(r.pressure_pa), fmt_opt(r.f0_hz), fmt_opt(r.pitch_midi), r.amplitude,
                   r.voiced ? 1 : 0, to_string(r.discard));
  return fmt::to_string(out);
}

FeatureTable parse_features_csv(std::string_view text, const HopGrid& grid) {
  FeatureTable table;
  table.grid = grid;
  std::size_t pos = 0, row = 0;
  bool header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kFeatureHeader) throw_input("features csv: unexpected header");
      header = true;
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cols.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 8) throw_input(fmt::format("features csv: expected 8 columns at row {}", row));

    HopRecord r;
    const auto index = parse_opt(cols[0], row);
    const auto time = parse_opt(cols[1], row);
    const auto amp = parse_opt(cols[5], row);
    if (!index || !time || !amp) throw_input(fmt::format("features csv: missing field at row {}", row));
    r.index = static_cast<std::int64_t>(*index);
    r.time_s = *time;
    r.pressure_pa = parse_opt(cols[2], row);
    r.f0_hz = parse_opt(cols[3], row);
    r.pitch_midi = parse_opt(cols[4], row);
    r.amplitude = *amp;
    if (cols[6] != "0" && cols[6] != "1")
      throw_input(fmt::format("features csv: voiced flag must be 0/1 at row {}", row));
    r.voiced = cols[6] == "1";
    r.discard = parse_discard_reason(cols[7]);
    if (r.index != static_cast<std::int64_t>(table.records.size()))
      throw_input(fmt::format("features csv: index gap at row {}", row));
    table.records.push_back(r);
  }
  if (!header) throw_input("features csv: empty file");
  return table;
}

}  // namespace flutekit
