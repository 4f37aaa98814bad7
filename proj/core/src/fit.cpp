#include "flutekit/fit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "flutekit/error.hpp"
#include "flutekit/model.hpp"

namespace flutekit {

std::size_t BendSampleSet::total() const {
  std::size_t n = 0;
  for (const auto& [pitch, g] : groups) n += g.size();
  return n;
}

BendSampleSet build_bend_samples(const FeatureTable& table, std::span<const NoteSegment> segments,
                                 int edge_margin_hops) {
  const int margin = edge_margin_hops >= 0
                         ? edge_margin_hops
                         : (table.grid.window + table.grid.hop - 1) / table.grid.hop;
  BendSampleSet set;
  for (const auto& s : segments) {
    for (int k = s.start; k < s.end; ++k) {
      const auto& r = table.records[static_cast<std::size_t>(k)];
      if (!r.retained() || !r.f0_hz || !r.pitch_midi) continue;
      if (k < s.start + margin || k >= s.end - margin) {
        ++set.excluded_edge;
        continue;
      }
      const double rel = *r.pitch_midi - s.base_pitch_midi;
      int sounding = s.base_pitch_midi;
      if (rel >= 6.0 && rel < 18.0) {
        sounding += 12;
      } else if (rel <= -6.0 || rel >= 18.0) {
        ++set.excluded_register;
        continue;
      }
      const double p = r.pressure_pa.value_or(0.0);
      if (!(p > 0.0)) {
        ++set.excluded_nonpositive;
        continue;
      }
      set.groups[sounding].push_back({std::log(p), *r.f0_hz / midi_to_hz(sounding), sounding});
    }
  }
  return set;
}

PointGroups transform_bend(const BendGroups& groups, double power) {
  PointGroups out;
  for (const auto& [pitch, g] : groups) {
    auto& pts = out[pitch];
    pts.reserve(g.size());
    for (const auto& s : g) pts.push_back({s.ln_pressure, std::pow(s.q, power) - 1.0});
  }
  return out;
}

std::optional<LineFit> fit_line(std::span<const Point> points) {
  if (points.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;

  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n = points.size();
  for (const auto& p : points) {
    const double e = p.y - (f.slope * p.x + f.intercept);
    f.rss += e * e;
  }
  return f;
}

PerNoteFits fit_per_note_lines(const BendGroups& groups, double power) {
  PerNoteFits out;
  for (const auto& [pitch, pts] : transform_bend(groups, power)) {
    if (auto f = fit_line(pts))
      out.lines.emplace(pitch, *f);
    else
      out.skipped.push_back(pitch);
  }
  return out;
}

CommonSlopeFit fit_common_slope(const PointGroups& groups) {
  // Within-group centering: the shared slope is sum(Sxy_g) / sum(Sxx_g).
  std::map<int, std::pair<double, double>> means;
  double sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& [key, pts] : groups) {
    if (pts.empty()) continue;
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    for (const auto& p : pts) {
      sxx += (p.x - mx) * (p.x - mx);
      sxy += (p.x - mx) * (p.y - my);
    }
    means[key] = {mx, my};
    n += pts.size();
  }
  if (means.empty()) throw_degenerate("common slope fit: no samples");
  if (!(sxx > 0.0)) throw_degenerate("common slope fit: no group has pressure spread");

  CommonSlopeFit fit;
  fit.slope = sxy / sxx;
  fit.n = n;
  for (const auto& [key, m] : means) fit.intercepts[key] = m.second - fit.slope * m.first;
  for (const auto& [key, pts] : groups) {
    if (pts.empty()) continue;
    const double b = fit.intercepts[key];
    for (const auto& p : pts) {
      const double e = p.y - (fit.slope * p.x + b);
      fit.rss += e * e;
    }
  }
  return fit;
}

std::vector<std::pair<int, double>> x_intercepts(double slope,
                                                 const std::map<int, double>& intercepts) {
  if (slope == 0.0 || !std::isfinite(slope)) throw_degenerate("x-intercepts: common slope is zero");
  std::vector<std::pair<int, double>> out;
  out.reserve(intercepts.size());
  for (const auto& [pitch, b] : intercepts) out.emplace_back(pitch, -b / slope);
  return out;
}

LineFit fit_meta_line(std::span<const std::pair<int, double>> pairs) {
  std::vector<Point> pts;
  pts.reserve(pairs.size());
  for (const auto& [pitch, x] : pairs) pts.push_back({static_cast<double>(pitch), x});
  auto f = fit_line(pts);
  if (!f) throw_degenerate("meta fit: need x-intercepts at two or more distinct pitches");
  return *f;
}

BendFitReport fit_bend_model(const BendSampleSet& samples, double power) {
  if (!(power > 0.0)) throw Error(ErrorKind::invalid_model, "bend fit: power must be positive");
  BendFitReport report;
  report.excluded_nonpositive = samples.excluded_nonpositive;
  report.excluded_edge = samples.excluded_edge;
  report.excluded_register = samples.excluded_register;
  report.per_note = fit_per_note_lines(samples.groups, power);

  // Degenerate groups carry no slope information and an undetermined line,
  // so they stay out of the joint fit as well.
  auto points = transform_bend(samples.groups, power);
  for (int skipped : report.per_note.skipped) points.erase(skipped);
  report.common = fit_common_slope(points);
  report.x_intercepts = x_intercepts(report.common.slope, report.common.intercepts);
  const auto meta = fit_meta_line(report.x_intercepts);

  report.model.power = power;
  report.model.common_slope = report.common.slope;
  report.model.meta_slope = meta.slope;
  report.model.meta_intercept = meta.intercept;
  return report;
}

std::string_view to_string(LabelSource s) { return s == LabelSource::manual ? "manual" : "auto"; }

LabelSource parse_label_source(std::string_view s) {
  if (s == "auto") return LabelSource::automatic;
  if (s == "manual") return LabelSource::manual;
  throw_input(fmt::format("label source must be 'auto' or 'manual', got '{}'", s));
}

std::vector<ThresholdLabel> auto_label_thresholds(std::span<const JumpEvent> events,
                                                  std::span<const NoteSegment> segments,
                                                  std::span<const Sweep> sweeps) {
  std::vector<ThresholdLabel> labels;
  for (const auto& e : events) {
    if (!e.ln_pressure || !std::isfinite(*e.ln_pressure)) continue;
    const auto seg = std::find_if(segments.begin(), segments.end(),
                                  [&](const NoteSegment& s) { return s.id == e.note_id; });
    if (seg == segments.end()) continue;
    const bool in_sweep = std::any_of(sweeps.begin(), sweeps.end(), [&](const Sweep& w) {
      return w.note_id == e.note_id && w.direction == e.direction && w.contains(e.hop);
    });
    if (!in_sweep) continue;
    labels.push_back({e.note_id, seg->base_pitch_midi, e.direction, *e.ln_pressure,
                      LabelSource::automatic});
  }
  return labels;
}

std::vector<ThresholdLabel> merge_labels(std::span<const ThresholdLabel> automatic,
                                         std::span<const ThresholdLabel> manual) {
  std::set<std::pair<int, Direction>> overridden;
  for (const auto& m : manual) overridden.emplace(m.note_id, m.direction);
  std::vector<ThresholdLabel> out;
  for (const auto& a : automatic)
    if (!overridden.contains({a.note_id, a.direction})) out.push_back(a);
  for (const auto& m : manual) {
    auto copy = m;
    copy.source = LabelSource::manual;
    out.push_back(copy);
  }
  std::stable_sort(out.begin(), out.end(), [](const ThresholdLabel& a, const ThresholdLabel& b) {
    return std::pair(a.note_id, a.direction) < std::pair(b.note_id, b.direction);
  });
  return out;
}

ThresholdModel fit_threshold_model(std::span<const ThresholdLabel> labels) {
  PointGroups groups;
  std::set<int> pitches;
  for (const auto& l : labels) {
    if (!std::isfinite(l.ln_pressure)) throw_input("threshold fit: non-finite label pressure");
    groups[l.direction == Direction::up ? 0 : 1].push_back(
        {static_cast<double>(l.pitch_midi), l.ln_pressure});
    pitches.insert(l.pitch_midi);
  }
  if (groups[0].empty() || groups[1].empty())
    throw_degenerate("threshold fit: need both up and down labels");
  if (pitches.size() < 2) throw_degenerate("threshold fit: need labels at two or more pitches");

  const auto fit = fit_common_slope(groups);
  return {fit.slope, fit.intercepts.at(0), fit.intercepts.at(1)};
}

void FluteModel::validate() const {
  if (!(bend.power > 0.0) || !std::isfinite(bend.power))
    throw Error(ErrorKind::invalid_model, "model: power must be positive");
  for (double v : {bend.common_slope, bend.meta_slope, bend.meta_intercept, thresholds.slope,
                   thresholds.up_intercept, thresholds.down_intercept})
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_model, "model: non-finite parameter");
  if (!(thresholds.down_intercept < thresholds.up_intercept))
    throw Error(ErrorKind::invalid_model,
                fmt::format("model: inverted hysteresis band (down {} >= up {})",
                            thresholds.down_intercept, thresholds.up_intercept));
}

FluteModel assemble_model(const BendModel& bend, const ThresholdModel& thresholds) {
  FluteModel m{bend, thresholds};
  m.validate();
  return m;
}

}  // namespace flutekit
