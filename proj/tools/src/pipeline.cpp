#include "flutekit/cli/pipeline.hpp"

#include <fmt/format.h>

#include <charconv>
#include <json.hpp>

#include "flutekit/error.hpp"

namespace flutekit::cli {

using nlohmann::json;

Analysis run_analysis(std::string_view audio_bytes, std::string_view pressure_log,
                      const PipelineConfig& config) {
  const auto audio = load_audio(audio_bytes, config.grid);
  const auto pressure = parse_pressure_log(pressure_log);
  auto table = extract_features(audio, pressure, config.grid, config.yin);

  if (!(table.max_amplitude() > 0.0))
    throw_input("cannot estimate atmosphere: the audio is silent");

  Analysis out;
  auto& side = out.sidecar;
  side.grid = config.grid;
  side.alignment = align_session(table, config.align);
  const auto drift = check_drift(table, side.alignment, config.align);
  side.alignment.drift_hops = drift.drift_hops;
  side.drift_warning = drift.warning;

  table = apply_offset(table, side.alignment.offset_hops);
  table = mark_silence(table, detect_silence(table, config.segment.silence_threshold));
  table = zero_pressure(table, config.segment);
  side.segments = segment_notes(table, config.segment, config.fingerings);
  side.events = detect_octave_jumps(table, side.segments, config.segment);
  table = discard_disequilibrium(table, side.events, config.segment.disequilibrium_ms);
  side.sweeps = tag_sweeps(table, side.segments, config.segment.smoothing_hops);
  side.meta = table.meta;

  out.table = std::move(table);
  return out;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string serialize_sidecar(const Sidecar& s) {
  json j;
  j["grid"] = {{"sample_rate", s.grid.sample_rate}, {"hop", s.grid.hop}, {"window", s.grid.window}};
  j["meta"] = {{"offset_hops", opt_json(s.meta.offset_hops)},
               {"baseline_pa", opt_json(s.meta.baseline_pa)}};
  j["alignment"] = {{"offset_hops", s.alignment.offset_hops},
                    {"score", s.alignment.score},
                    {"matched", s.alignment.matched},
                    {"reference_end_hop", s.alignment.reference_end_hop},
                    {"drift_hops", opt_json(s.alignment.drift_hops)},
                    {"drift_warning", s.drift_warning}};
  j["segments"] = json::array();
  for (const auto& g : s.segments)
    j["segments"].push_back({{"id", g.id},
                             {"start", g.start},
                             {"end", g.end},
                             {"base_pitch_midi", g.base_pitch_midi},
                             {"repetition", g.repetition}});
  j["sweeps"] = json::array();
  for (const auto& w : s.sweeps)
    j["sweeps"].push_back({{"note_id", w.note_id},
                           {"direction", std::string(to_string(w.direction))},
                           {"start", w.start},
                           {"end", w.end}});
  j["events"] = json::array();
  for (const auto& e : s.events)
    j["events"].push_back({{"note_id", e.note_id},
                           {"hop", e.hop},
                           {"direction", std::string(to_string(e.direction))},
                           {"ln_pressure", opt_json(e.ln_pressure)},
                           {"prev_hop", e.prev_hop ? json(*e.prev_hop) : json(nullptr)}});
  return j.dump(2) + "\n";
}

Sidecar parse_sidecar(std::string_view text) {
  Sidecar s;
  try {
    const json j = json::parse(text);
    const auto& g = j.at("grid");
    s.grid.sample_rate = g.at("sample_rate");
    s.grid.hop = g.at("hop");
    s.grid.window = g.at("window");
    const auto& m = j.at("meta");
    if (!m.at("offset_hops").is_null()) s.meta.offset_hops = m.at("offset_hops").get<int>();
    if (!m.at("baseline_pa").is_null()) s.meta.baseline_pa = m.at("baseline_pa").get<double>();
    const auto& a = j.at("alignment");
    s.alignment.offset_hops = a.at("offset_hops");
    s.alignment.score = a.at("score");
    s.alignment.matched = a.at("matched");
    s.alignment.reference_end_hop = a.at("reference_end_hop");
    if (!a.at("drift_hops").is_null()) s.alignment.drift_hops = a.at("drift_hops").get<int>();
    s.drift_warning = a.value("drift_warning", "");
    for (const auto& e : j.at("segments"))
      s.segments.push_back({e.at("id"), e.at("start"), e.at("end"), e.at("base_pitch_midi"),
                            e.at("repetition")});
    for (const auto& e : j.at("sweeps"))
      s.sweeps.push_back({e.at("note_id"), parse_direction(e.at("direction").get<std::string>()),
                          e.at("start"), e.at("end")});
    for (const auto& e : j.at("events")) {
      JumpEvent ev;
      ev.note_id = e.at("note_id");
      ev.hop = e.at("hop");
      ev.direction = parse_direction(e.at("direction").get<std::string>());
      if (!e.at("ln_pressure").is_null()) ev.ln_pressure = e.at("ln_pressure").get<double>();
      if (e.contains("prev_hop") && !e.at("prev_hop").is_null()) ev.prev_hop = e.at("prev_hop").get<int>();
      s.events.push_back(ev);
    }
  } catch (const json::exception& e) {
    throw_input(fmt::format("sidecar: {}", e.what()));
  }
  s.grid.validate();
  return s;
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& features_csv) {
  auto p = features_csv;
  p.replace_extension(".sidecar.json");
  return p;
}

std::vector<ThresholdLabel> effective_labels(const Sidecar& sidecar,
                                             std::span<const ThresholdLabel> stored) {
  const auto automatic = auto_label_thresholds(sidecar.events, sidecar.segments, sidecar.sweeps);
  std::vector<ThresholdLabel> manual;
  for (const auto& l : stored)
    if (l.source == LabelSource::manual) manual.push_back(l);
  return merge_labels(automatic, manual);
}

std::vector<int> parse_fingerings(std::string_view list, int repeats) {
  if (repeats < 1) throw_input("fingerings: repeats must be >= 1");
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    const auto item = list.substr(pos, comma - pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw_input(fmt::format("fingerings: '{}' is not a MIDI pitch", item));
    for (int r = 0; r < repeats; ++r) out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace flutekit::cli
