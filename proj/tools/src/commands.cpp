#include "flutekit/cli/commands.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <json.hpp>

#include "flutekit/cli/plot.hpp"
#include "flutekit/generator.hpp"
#include "flutekit/ingest.hpp"

namespace flutekit::cli {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return 2;
    case ErrorKind::alignment: return 3;
    case ErrorKind::fit_degenerate: return 4;
    case ErrorKind::invalid_model: return 5;
  }
  return 1;
}

void cmd_analyze(const AnalyzeOptions& opts, std::ostream& log) {
  opts.config.grid.validate();
  const auto audio = read_file(opts.audio);
  const auto pressure = read_file(opts.pressure);
  const auto result = run_analysis(audio, pressure, opts.config);

  const auto sidecar_path = opts.sidecar.value_or(sidecar_path_for(opts.out));
  write_file(opts.out, serialize_features_csv(result.table));
  write_file(sidecar_path, serialize_sidecar(result.sidecar));

  const auto& a = result.sidecar.alignment;
  log << fmt::format("offset {} hops, score {:.3f} ({} matched)\n", a.offset_hops, a.score,
                     a.matched);
  if (a.drift_hops) log << fmt::format("drift {} hops\n", *a.drift_hops);
  if (!result.sidecar.drift_warning.empty())
    log << "warning: " << result.sidecar.drift_warning << "\n";
  log << fmt::format("baseline {:.2f} Pa\n", result.table.meta.baseline_pa.value_or(0.0));
  log << fmt::format("{} hops, {} segments, {} jump events\n", result.table.size(),
                     result.sidecar.segments.size(), result.sidecar.events.size());
}

namespace {

json line_json(int pitch, const LineFit& l) {
  return {{"pitch_midi", pitch}, {"slope", l.slope}, {"intercept", l.intercept},
          {"n", l.n},           {"rss", l.rss}};
}

std::string report_json(const FitOutcome& out) {
  json j;
  j["model"] = json::parse(serialize_model(out.model));
  j["per_note"] = json::array();
  for (const auto& [pitch, line] : out.bend.per_note.lines)
    j["per_note"].push_back(line_json(pitch, line));
  j["skipped_pitches"] = out.bend.per_note.skipped;
  json common = {{"slope", out.bend.common.slope}, {"n", out.bend.common.n},
                 {"rss", out.bend.common.rss}};
  common["intercepts"] = json::array();
  for (const auto& [pitch, b] : out.bend.common.intercepts)
    common["intercepts"].push_back({{"pitch_midi", pitch}, {"intercept", b}});
  j["common"] = common;
  j["x_intercepts"] = json::array();
  for (const auto& [pitch, x] : out.bend.x_intercepts)
    j["x_intercepts"].push_back({{"pitch_midi", pitch}, {"ln_pressure", x}});

  int counts[2][2] = {{0, 0}, {0, 0}};
  for (const auto& l : out.labels)
    ++counts[l.direction == Direction::up ? 0 : 1][l.source == LabelSource::manual ? 1 : 0];
  j["labels"] = {{"up_auto", counts[0][0]},   {"up_manual", counts[0][1]},
                 {"down_auto", counts[1][0]}, {"down_manual", counts[1][1]},
                 {"total", out.labels.size()}};
  j["exclusions"] = {{"nonpositive_pressure", out.bend.excluded_nonpositive},
                     {"segment_edge", out.bend.excluded_edge},
                     {"out_of_register", out.bend.excluded_register}};
  return j.dump(2) + "\n";
}

}  // namespace

FitOutcome run_fit(const FeatureTable& table, const Sidecar& sidecar,
                   std::span<const ThresholdLabel> stored, double power) {
  FitOutcome out;
  out.bend = fit_bend_model(build_bend_samples(table, sidecar.segments), power);
  out.labels = effective_labels(sidecar, stored);
  out.model = assemble_model(out.bend.model, fit_threshold_model(out.labels));
  out.report_json = report_json(out);
  return out;
}

void cmd_fit(const FitOptions& opts, std::ostream& log) {
  const auto side = parse_sidecar(read_file(opts.sidecar.value_or(sidecar_path_for(opts.features))));
  const auto table = parse_features_csv(read_file(opts.features), side.grid);
  std::vector<ThresholdLabel> stored;
  if (opts.labels) stored = parse_labels(read_file(*opts.labels));

  const auto out = run_fit(table, side, stored, opts.power);
  write_file(opts.out, serialize_model(out.model));
  auto report = opts.report;
  if (!report) {
    report = opts.out;
    report->replace_extension(".report.json");
  }
  write_file(*report, out.report_json);

  const auto& m = out.model;
  log << fmt::format("common slope {:.6g}, meta slope {:.6g}, meta intercept {:.6g}\n",
                     m.bend.common_slope, m.bend.meta_slope, m.bend.meta_intercept);
  log << fmt::format("threshold slope {:.6g}, up {:.6g}, down {:.6g} ({} labels)\n",
                     m.thresholds.slope, m.thresholds.up_intercept, m.thresholds.down_intercept,
                     out.labels.size());
}

std::vector<double> parse_trace_csv(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  int line = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto row = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (line == 1) {
      if (row != "pressure_pa") throw_input("trace: header must be 'pressure_pa'");
      continue;
    }
    if (row.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(row.data(), row.data() + row.size(), v);
    if (ec != std::errc() || ptr != row.data() + row.size() || !std::isfinite(v))
      throw_input(fmt::format("trace line {}: '{}' is not a number", line, row));
    out.push_back(v);
  }
  if (line == 0) throw_input("trace: empty file");
  return out;
}

std::string serialize_trace_csv(std::span<const TracePoint> points, std::span<const double> trace) {
  std::string s = "index,pressure_pa,register,sounding_pitch,q,bend,f_hz,valid,jump\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    s += fmt::format("{},{},{},{},{},{},{},{},{}\n", i, trace[i],
                     p.reg == Register::low ? "low" : "high", p.sounding_pitch, p.q, p.bend, p.f_hz,
                     p.valid ? 1 : 0, p.jumped ? to_string(*p.jumped) : "");
  }
  return s;
}

void cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  const auto model = parse_model(read_file(opts.model));
  model.validate();
  const auto trace = parse_trace_csv(read_file(opts.trace));
  const auto points = simulate_trace(model, opts.pitch, trace, HysteresisState{opts.initial});
  write_file(opts.out, serialize_trace_csv(points, trace));
  int jumps = 0;
  for (const auto& p : points) jumps += p.jumped ? 1 : 0;
  log << fmt::format("{} hops, {} register changes\n", points.size(), jumps);
}

void cmd_synth(const SynthOptions& opts, std::ostream& log) {
  const auto model = opts.model ? parse_model(read_file(*opts.model)) : reference_model();
  model.validate();
  auto script = opts.script ? parse_script(read_file(*opts.script)) : default_script();
  if (opts.lag_hops) script.lag_hops = *opts.lag_hops;
  if (opts.seed) script.seed = *opts.seed;
  const auto files = generate_session(script, model);
  write_file(opts.out_audio, files.wav);
  write_file(opts.out_pressure, files.pressure_csv);
  write_file(opts.out_truth, serialize_truth(files.truth));
  log << fmt::format("{} notes, {} jumps, {} audio samples\n", files.truth.notes.size(),
                     files.truth.jumps.size(), files.truth.audio_samples);
}

void cmd_plot(const PlotOptions& opts, std::ostream& log) {
  const auto kind = parse_plot_kind(opts.which);
  const auto sidecar_path = opts.sidecar.value_or(sidecar_path_for(opts.features));
  std::optional<Sidecar> side;
  HopGrid grid;
  if (opts.sidecar || fs::exists(sidecar_path)) {
    side = parse_sidecar(read_file(sidecar_path));
    grid = side->grid;
  }
  const auto table = parse_features_csv(read_file(opts.features), grid);

  PlotInputs in;
  in.table = &table;
  in.sidecar = side ? &*side : nullptr;
  in.note = opts.note;
  in.power = opts.power;
  if (opts.model) {
    in.model = parse_model(read_file(*opts.model));
    in.model->validate();
  }
  std::vector<ThresholdLabel> stored;
  if (opts.labels) stored = parse_labels(read_file(*opts.labels));
  in.labels = side ? effective_labels(*side, stored) : stored;

  const auto svg = render_plot(kind, in);
  write_file(opts.out, svg);
  log << fmt::format("wrote {} ({} bytes)\n", opts.out.string(), svg.size());
}

}  // namespace flutekit::cli
