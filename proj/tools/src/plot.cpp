#include "flutekit/cli/plot.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <map>

#include "flutekit/cli/svg.hpp"
#include "flutekit/error.hpp"
#include "flutekit/model.hpp"

namespace flutekit::cli {

namespace {

constexpr std::string_view kUp = "#1f5fbf";
constexpr std::string_view kDown = "#c62828";
constexpr std::string_view kDiscarded = "#000000";

constexpr std::array<std::pair<PlotKind, std::string_view>, 8> kNames = {{
    {PlotKind::timeline, "timeline"},
    {PlotKind::bend_scatter, "bend_scatter"},
    {PlotKind::bend_linear, "bend_linear"},
    {PlotKind::xintercepts, "xintercepts"},
    {PlotKind::model_overlay, "model_overlay"},
    {PlotKind::hysteresis, "hysteresis"},
    {PlotKind::thresholds, "thresholds"},
    {PlotKind::amplitude, "amplitude"},
}};

std::vector<double> xs(std::span<const Point> pts) {
  std::vector<double> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p.x);
  return v;
}

std::vector<double> ys(std::span<const Point> pts) {
  std::vector<double> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p.y);
  return v;
}

Range range_x(std::span<const Point> a) { return Range::of(xs(a)); }
Range range_y(std::span<const Point> a) { return Range::of(ys(a)); }

void need_sidecar(const PlotInputs& in, PlotKind kind) {
  if (!in.sidecar)
    throw_input(fmt::format("plot {}: the analysis sidecar is required", to_string(kind)));
}

// Segment base pitch for every hop, -1 outside segments.
std::vector<int> base_pitch_by_hop(const FeatureTable& t, const Sidecar& s) {
  std::vector<int> out(t.size(), -1);
  for (const auto& g : s.segments)
    for (int k = std::max(g.start, 0); k < g.end && k < static_cast<int>(t.size()); ++k)
      out[static_cast<std::size_t>(k)] = g.base_pitch_midi;
  return out;
}

FluteModel model_for(const PlotInputs& in) {
  if (in.model) return *in.model;
  const auto samples = build_bend_samples(*in.table, in.sidecar->segments);
  const auto bend = fit_bend_model(samples, in.power);
  return FluteModel{bend.model, fit_threshold_model(in.labels)};
}

std::string timeline(const PlotInputs& in) {
  const auto& t = *in.table;
  std::vector<Point> pressure, amp, pitch_keep, pitch_drop;
  for (const auto& r : t.records) {
    pressure.push_back({r.time_s, r.pressure_pa.value_or(0.0)});
    amp.push_back({r.time_s, r.amplitude});
    if (r.pitch_midi) (r.retained() ? pitch_keep : pitch_drop).push_back({r.time_s, *r.pitch_midi});
  }
  const Range tr = range_x(pressure);
  Figure fig(960.0, 230.0);
  auto& p0 = fig.add_panel(tr, range_y(pressure).padded(0.05));
  p0.set_labels("pressure", "time (s)", "gauge pressure (Pa)");
  p0.polyline(pressure, "#2e7d32");
  auto& p1 = fig.add_panel(tr, range_y(amp).padded(0.05));
  p1.set_labels("amplitude", "time (s)", "mean square amplitude");
  p1.polyline(amp, "#6a1b9a");
  std::vector<Point> all_pitch = pitch_keep;
  all_pitch.insert(all_pitch.end(), pitch_drop.begin(), pitch_drop.end());
  auto& p2 = fig.add_panel(tr, range_y(all_pitch).padded(0.05));
  p2.set_labels("pitch", "time (s)", "pitch (MIDI)");
  p2.scatter(pitch_drop, kDiscarded, 1.2);
  p2.scatter(pitch_keep, kUp, 1.2);
  p2.legend("retained", kUp);
  p2.legend("discarded", kDiscarded);
  return fig.render();
}

std::string bend_scatter(const PlotInputs& in) {
  const auto& t = *in.table;
  const auto base = base_pitch_by_hop(t, *in.sidecar);
  std::map<int, std::vector<Point>> kept;
  std::vector<Point> dropped, all;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& r = t.records[k];
    if (base[k] < 0 || !r.pitch_midi || !r.pressure_pa) continue;
    const Point p{*r.pressure_pa, *r.pitch_midi - base[k]};
    if (r.retained())
      kept[base[k]].push_back(p);
    else if (r.discard == DiscardReason::disequilibrium)
      dropped.push_back(p);
    else
      continue;
    all.push_back(p);
  }
  Figure fig;
  auto& p = fig.add_panel(range_x(all).padded(0.03), range_y(all).padded(0.05));
  p.set_labels("pitch bend against pressure", "gauge pressure (Pa)",
               "pitch above fingering (semitones)");
  p.scatter(dropped, kDiscarded, 1.4);
  int i = 0;
  for (const auto& [pitch, pts] : kept) {
    p.scatter(pts, palette(i), 1.4);
    p.legend(fmt::format("{}", pitch), palette(i++));
  }
  p.hline(0.0, "#888");
  p.hline(12.0, "#888");
  return fig.render();
}

std::string bend_linear(const PlotInputs& in) {
  const auto samples = build_bend_samples(*in.table, in.sidecar->segments);
  const auto groups = transform_bend(samples.groups, in.power);
  const auto fits = fit_per_note_lines(samples.groups, in.power);
  std::vector<Point> all;
  for (const auto& [pitch, pts] : groups) all.insert(all.end(), pts.begin(), pts.end());
  const Range xr = range_x(all).padded(0.03);
  Figure fig;
  auto& p = fig.add_panel(xr, range_y(all).padded(0.05));
  p.set_labels("linearised bend", "ln pressure (ln Pa)",
               fmt::format("q^{:g} - 1", in.power));
  int i = 0;
  for (const auto& [pitch, pts] : groups) {
    const auto color = palette(i++);
    p.scatter(pts, color, 1.3);
    p.legend(fmt::format("{}", pitch), color);
    if (const auto it = fits.lines.find(pitch); it != fits.lines.end()) {
      const Range gx = range_x(pts);
      const std::array<Point, 2> line = {
          Point{gx.lo, it->second.slope * gx.lo + it->second.intercept},
          Point{gx.hi, it->second.slope * gx.hi + it->second.intercept}};
      p.polyline(line, color, 1.5);
    }
  }
  p.hline(0.0, "#888");
  return fig.render();
}

std::string xintercepts(const PlotInputs& in) {
  const auto samples = build_bend_samples(*in.table, in.sidecar->segments);
  const auto report = fit_bend_model(samples, in.power);
  std::vector<Point> pts;
  for (const auto& [pitch, x] : report.x_intercepts) pts.push_back({double(pitch), x});
  const Range xr = range_x(pts).padded(0.05);
  Figure fig;
  auto& p = fig.add_panel(xr, range_y(pts).padded(0.1));
  p.set_labels("in-tune ln pressure per pitch", "sounding pitch (MIDI)", "x-intercept (ln Pa)");
  const auto& m = report.model;
  const std::array<Point, 2> line = {Point{xr.lo, m.meta_slope * xr.lo + m.meta_intercept},
                                     Point{xr.hi, m.meta_slope * xr.hi + m.meta_intercept}};
  p.polyline(line, kDown, 1.5);
  p.scatter(pts, kUp, 3.5);
  p.legend(fmt::format("a={:.5f} b={:.4f}", m.meta_slope, m.meta_intercept), kDown);
  return fig.render();
}

std::string model_overlay(const PlotInputs& in) {
  const auto model = model_for(in);
  const auto samples = build_bend_samples(*in.table, in.sidecar->segments);
  std::vector<Point> all;
  std::map<int, std::vector<Point>> data;
  for (const auto& [pitch, group] : samples.groups)
    for (const auto& s : group) {
      const Point pt{s.ln_pressure, 12.0 * std::log2(s.q)};
      data[pitch].push_back(pt);
      all.push_back(pt);
    }
  const Range xr = range_x(all).padded(0.03);
  Figure fig;
  auto& p = fig.add_panel(xr, range_y(all).padded(0.1));
  p.set_labels("model against data", "ln pressure (ln Pa)", "bend (semitones)");
  int i = 0;
  for (const auto& [pitch, pts] : data) {
    const auto color = palette(i++);
    p.scatter(pts, color, 1.2);
    const Range gx = range_x(pts);
    std::vector<Point> curve;
    constexpr int kSteps = 60;
    for (int k = 0; k <= kSteps; ++k) {
      const double x = gx.lo + (gx.hi - gx.lo) * k / kSteps;
      const auto b = bend_at(model, pitch, std::exp(x));
      if (b.valid) curve.push_back({x, b.bend});
    }
    p.polyline(curve, "#000000", 1.2);
    p.legend(fmt::format("{}", pitch), color);
  }
  p.hline(0.0, "#888");
  return fig.render();
}

std::string hysteresis(const PlotInputs& in) {
  const auto& t = *in.table;
  const auto& side = *in.sidecar;
  const int id = in.note.value_or(side.segments.empty() ? 0 : side.segments.front().id);
  const NoteSegment* seg = nullptr;
  for (const auto& g : side.segments)
    if (g.id == id) seg = &g;
  if (!seg) throw_input(fmt::format("plot hysteresis: no note with id {}", id));

  std::vector<Point> up, down, dropped, all;
  for (int k = seg->start; k < seg->end && k < static_cast<int>(t.size()); ++k) {
    const auto& r = t.records[static_cast<std::size_t>(k)];
    if (!r.voiced || !r.pitch_midi || !r.pressure_pa || *r.pressure_pa <= 0.0) continue;
    const Point pt{std::log(*r.pressure_pa), *r.pitch_midi - seg->base_pitch_midi};
    all.push_back(pt);
    if (!r.retained()) {
      dropped.push_back(pt);
      continue;
    }
    bool in_up = false;
    for (const auto& w : side.sweeps)
      if (w.note_id == id && w.direction == Direction::up && w.contains(k)) in_up = true;
    (in_up ? up : down).push_back(pt);
  }
  Figure fig;
  auto& p = fig.add_panel(range_x(all).padded(0.05), range_y(all).padded(0.08));
  p.set_labels(fmt::format("note {} (fingering {}, repetition {})", id, seg->base_pitch_midi,
                           seg->repetition),
               "ln pressure (ln Pa)", "pitch above fingering (semitones)");
  p.scatter(dropped, kDiscarded, 1.6);
  p.scatter(up, kUp, 1.8);
  p.scatter(down, kDown, 1.8);
  p.legend("up sweep", kUp);
  p.legend("down sweep", kDown);
  p.legend("discarded", kDiscarded);
  for (const auto& l : in.labels) {
    if (l.note_id != id) continue;
    const bool is_up = l.direction == Direction::up;
    p.vline(l.ln_pressure, is_up ? kUp : kDown,
            fmt::format("{} {:.0f} Pa", is_up ? "up" : "down", std::exp(l.ln_pressure)));
  }
  return fig.render();
}

std::string thresholds(const PlotInputs& in) {
  std::vector<Point> up, down, all;
  for (const auto& l : in.labels) {
    const Point pt{double(l.pitch_midi), l.ln_pressure};
    (l.direction == Direction::up ? up : down).push_back(pt);
    all.push_back(pt);
  }
  if (all.empty()) throw_input("plot thresholds: no labels");
  const Range xr = range_x(all).padded(0.05);
  Figure fig;
  auto& p = fig.add_panel(xr, range_y(all).padded(0.1));
  p.set_labels("octave thresholds per pitch", "fingering pitch (MIDI)",
               "threshold ln pressure (ln Pa)");
  ThresholdModel m;
  if (in.model)
    m = in.model->thresholds;
  else
    m = fit_threshold_model(in.labels);
  for (const auto& [icpt, color] : {std::pair{m.up_intercept, kUp}, {m.down_intercept, kDown}}) {
    const std::array<Point, 2> line = {Point{xr.lo, m.slope * xr.lo + icpt},
                                       Point{xr.hi, m.slope * xr.hi + icpt}};
    p.polyline(line, color, 1.2);
  }
  p.scatter(up, kUp, 3.5);
  p.scatter(down, kDown, 3.5);
  p.legend("up", kUp);
  p.legend("down", kDown);
  return fig.render();
}

std::string amplitude(const PlotInputs& in) {
  std::vector<Point> kept, dropped, all;
  for (const auto& r : in.table->records) {
    if (!r.pressure_pa) continue;
    const Point pt{*r.pressure_pa, r.amplitude};
    if (r.retained())
      kept.push_back(pt);
    else if (r.voiced || r.discard == DiscardReason::disequilibrium)
      dropped.push_back(pt);
    else
      continue;
    all.push_back(pt);
  }
  Figure fig;
  auto& p = fig.add_panel(range_x(all).padded(0.03), range_y(all).padded(0.05));
  p.set_labels("amplitude against pressure", "gauge pressure (Pa)", "mean square amplitude");
  p.scatter(dropped, kDiscarded, 1.3);
  p.scatter(kept, kUp, 1.3);
  p.legend("retained", kUp);
  p.legend("discarded", kDiscarded);
  return fig.render();
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "?";
}

PlotKind parse_plot_kind(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw_input(fmt::format("unknown plot '{}'", name));
}

std::vector<std::string_view> plot_kind_names() {
  std::vector<std::string_view> out;
  for (const auto& [k, name] : kNames) out.push_back(name);
  return out;
}

std::string render_plot(PlotKind kind, const PlotInputs& in) {
  if (!in.table) throw_input("plot: a features table is required");
  switch (kind) {
    case PlotKind::timeline: return timeline(in);
    case PlotKind::amplitude: return amplitude(in);
    case PlotKind::thresholds: return thresholds(in);
    default: break;
  }
  need_sidecar(in, kind);
  switch (kind) {
    case PlotKind::bend_scatter: return bend_scatter(in);
    case PlotKind::bend_linear: return bend_linear(in);
    case PlotKind::xintercepts: return xintercepts(in);
    case PlotKind::model_overlay: return model_overlay(in);
    case PlotKind::hysteresis: return hysteresis(in);
    default: break;
  }
  throw_input("plot: unhandled kind");
}

}  // namespace flutekit::cli
