#include "flutekit/generator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <json.hpp>
#include <numbers>
#include <random>

#include "flutekit/error.hpp"
#include "flutekit/model.hpp"

namespace flutekit {

SessionScript default_script() {
  SessionScript s;
  for (int pitch : {72, 74, 76, 77, 79, 81, 83}) {
    NoteEntry e;
    e.base_pitch_midi = pitch;
    s.notes.push_back(e);
  }
  return s;
}

namespace {

enum class EventKind { impulse, note };

struct Event {
  EventKind kind = EventKind::note;
  double t0 = 0.0;
  double attack = 0.0;
  double target = 0.0;  // pressure reached by the attack ramp
  double apex = 0.0;    // notes only
  double hold = 0.0;    // impulses only
  double rise = 0.0;
  double fall = 0.0;
  int note_index = -1;
  double base_pitch = 0.0;

  double duration() const {
    return kind == EventKind::impulse ? 2 * attack + hold : 2 * attack + rise + fall;
  }
  double end() const { return t0 + duration(); }

  double pressure(double tau) const {
    const double t = tau - t0;
    if (t < 0.0 || t >= duration()) return 0.0;
    if (t < attack) return target * t / attack;
    if (kind == EventKind::impulse) {
      if (t < attack + hold) return target;
      return target * (1.0 - (t - attack - hold) / attack);
    }
    if (t < attack + rise) return target + (apex - target) * (t - attack) / rise;
    if (t < attack + rise + fall) return apex - (apex - target) * (t - attack - rise) / fall;
    return target * (1.0 - (t - attack - rise - fall) / attack);
  }
};

void require(bool ok, const std::string& what) {
  if (!ok) throw_input("session script: " + what);
}

struct Timeline {
  std::vector<Event> events;
  double end = 0.0;

  double pressure(double tau) const {
    auto it = std::upper_bound(events.begin(), events.end(), tau,
                               [](double t, const Event& e) { return t < e.t0; });
    if (it == events.begin()) return 0.0;
    return std::prev(it)->pressure(tau);
  }
};

Timeline build_timeline(const SessionScript& script, const FluteModel& model,
                        std::vector<TruthNote>& notes) {
  require(script.attack_s > 0.0, "attack_s must be positive");
  require(script.lead_s >= 0.0 && script.tail_s >= 0.0, "lead/tail must be non-negative");
  require(script.start_u > 0.0 && script.start_u <= 1.0, "start_u must lie in (0, 1]");
  require(script.voice_fraction > 0.0 && script.voice_fraction <= 1.0,
          "voice_fraction must lie in (0, 1]");

  Timeline tl;
  double t = script.lead_s;
  if (script.preamble) {
    const auto& imp = script.impulses;
    require(imp.groups > 0 && imp.per_group > 0, "impulse counts must be positive");
    require(imp.pressure_pa > 0.0 && imp.hold_s > 0.0, "impulse pressure/hold must be positive");
    require(imp.spacing_s > 2 * script.attack_s + imp.hold_s, "impulse spacing too short");
    for (int g = 0; g < imp.groups; ++g) {
      for (int i = 0; i < imp.per_group; ++i) {
        Event e;
        e.kind = EventKind::impulse;
        e.t0 = t;
        e.attack = script.attack_s;
        e.target = imp.pressure_pa;
        e.hold = imp.hold_s;
        tl.events.push_back(e);
        t += imp.spacing_s;
      }
      t += imp.group_gap_s - imp.spacing_s;
    }
    t += script.preamble_rest_s;
  }

  const double s = model.bend.common_slope;
  require(s > 0.0, "model common_slope must be positive");
  for (const auto& entry : script.notes) {
    require(entry.repetitions > 0, "repetitions must be positive");
    require(entry.rise_s > 0.0 && entry.fall_s > 0.0 && entry.rest_s > 0.0,
            "note durations must be positive");
    const double base = entry.base_pitch_midi;
    const double p_up = up_threshold_pa(model, base);
    const double p_down = down_threshold_pa(model, base);
    const double target = std::exp(x_intercept_at(model, base) + (script.start_u - 1.0) / s);
    const double apex = entry.apex_ratio * p_up;
    require(apex > p_up, fmt::format("apex for pitch {} does not reach the up threshold", base));
    require(target < p_down,
            fmt::format("attack target for pitch {} lies above the down threshold", base));
    for (int r = 0; r < entry.repetitions; ++r) {
      Event e;
      e.kind = EventKind::note;
      e.t0 = t;
      e.attack = script.attack_s;
      e.target = target;
      e.apex = apex;
      e.rise = entry.rise_s;
      e.fall = entry.fall_s;
      e.base_pitch = base;
      e.note_index = static_cast<int>(notes.size());
      tl.events.push_back(e);

      TruthNote tn;
      tn.id = e.note_index;
      tn.base_pitch_midi = entry.base_pitch_midi;
      tn.repetition = r;
      tn.up_threshold_pa = p_up;
      tn.down_threshold_pa = p_down;
      tn.apex_pa = apex;
      notes.push_back(tn);
      t = e.end() + entry.rest_s;
    }
  }
  tl.end = t + script.tail_s;
  return tl;
}

}  // namespace

SessionFiles generate_session(const SessionScript& script, const FluteModel& model,
                              const HopGrid& grid) {
  grid.validate();
  model.validate();
  SessionFiles files;
  GroundTruth& truth = files.truth;
  truth.baseline_pa = script.baseline_pa;
  truth.lag_hops = script.lag_hops;
  truth.drift_hops = script.drift_hops;

  const Timeline tl = build_timeline(script, model, truth.notes);
  const double sr = grid.sample_rate;
  const double hop_s = grid.hop_period_s();
  const double half_page_s = 0.5 * grid.window / sr;
  const auto to_hop = [&](double tau) { return tau / hop_s; };

  for (const auto& e : tl.events) {
    if (e.kind == EventKind::impulse) truth.impulse_hops.push_back(to_hop(e.t0));
    if (e.kind == EventKind::note)
      truth.notes[static_cast<std::size_t>(e.note_index)].apex_hop = to_hop(e.t0 + e.attack + e.rise);
  }

  std::mt19937_64 rng(script.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  // Audio, sample by sample. Sample n sits at tau = n / sr - half_page_s.
  const auto n_samples = static_cast<std::size_t>(std::ceil((tl.end + half_page_s) * sr));
  AudioBuffer audio;
  audio.rate = sr;
  audio.samples.resize(n_samples);
  truth.audio_samples = n_samples;

  std::size_t ev = 0;
  int active = -1;  // event index whose state is live
  HysteresisState state;
  double last_jump_tau = -1e9;
  double phase = 0.0;
  double env = 0.0;
  bool was_voiced = false;
  const double env_step = 1.0 / std::max(1.0, script.fade_s * sr);

  for (std::size_t n = 0; n < n_samples; ++n) {
    const double tau = static_cast<double>(n) / sr - half_page_s;
    while (ev + 1 < tl.events.size() && tau >= tl.events[ev + 1].t0) ++ev;
    const Event* e = tl.events.empty() ? nullptr : &tl.events[ev];
    const bool inside = e && tau >= e->t0 && tau < e->end();

    bool voiced = false;
    double freq = 0.0, amp = 0.0;
    if (inside) {
      if (active != static_cast<int>(ev)) {
        active = static_cast<int>(ev);
        state = {};
        last_jump_tau = -1e9;
      }
      const double p = e->pressure(tau);
      if (e->kind == EventKind::impulse) {
        voiced = p >= script.voice_fraction * e->target;
        freq = midi_to_hz(script.impulses.pitch_midi);
        amp = script.impulses.amplitude;
      } else if (p > 0.0) {
        const auto step = step_hysteresis(model, state, e->base_pitch, p);
        state = step.state;
        if (step.jumped) {
          last_jump_tau = tau;
          truth.jumps.push_back({e->note_index, to_hop(tau), *step.jumped, p});
        }
        const double sounding = e->base_pitch + (state.reg == Register::high ? 12.0 : 0.0);
        const auto b = bend_at(model, sounding, p);
        voiced = b.valid && p >= script.voice_fraction * e->target;
        double semis = 0.0;
        const double since = tau - last_jump_tau;
        if (since >= 0.0 && since < script.perturb_s)
          semis = script.perturb_semitones * (1.0 - since / script.perturb_s);
        freq = midi_to_hz(sounding) * b.q * std::exp2(semis / 12.0);
        amp = script.note_amplitude;
      }
    }

    if (voiced != was_voiced && e) {
      if (e->kind == EventKind::impulse) {
        if (voiced) truth.impulse_voiced.emplace_back(to_hop(tau), to_hop(tau));
        else if (!truth.impulse_voiced.empty()) truth.impulse_voiced.back().second = to_hop(tau);
      } else {
        auto& tn = truth.notes[static_cast<std::size_t>(e->note_index)];
        if (voiced) {
          if (tn.voiced_start_hop == 0.0) tn.voiced_start_hop = to_hop(tau);
        } else {
          tn.voiced_end_hop = to_hop(tau);
        }
      }
    }
    was_voiced = voiced;

    if (voiced) {
      env = std::min(amp, env + env_step * amp);
      phase += 2.0 * std::numbers::pi * freq / sr;
      if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    } else {
      env = std::max(0.0, env - env_step * std::max(amp, script.note_amplitude));
      if (env > 0.0) phase += 2.0 * std::numbers::pi * freq / sr;
    }
    audio.samples[n] = env * std::sin(phase) + script.audio_noise * unit_normal(rng);
  }
  files.wav = encode_wav_pcm16(audio);

  // Pressure log on its own jittered clock.
  std::uniform_real_distribution<double> interval(script.log_interval_min_ms,
                                                  script.log_interval_max_ms);
  const double gain = 1.0 + script.drift_hops * hop_s / tl.end;
  PressureSeries log;
  double t_ms = 0.0;
  while (true) {
    const double tau = (t_ms / 1000.0 - script.lag_hops * hop_s) / gain;
    const double p = script.baseline_pa + tl.pressure(tau) +
                     script.pressure_noise_pa * unit_normal(rng);
    log.samples.push_back({std::round(t_ms * 100.0) / 100.0, std::round(p * 100.0) / 100.0});
    if (tau > tl.end) break;
    t_ms += interval(rng);
  }
  files.pressure_csv = serialize_pressure_log(log);
  return files;
}

using nlohmann::json;

std::string serialize_truth(const GroundTruth& truth) {
  json j;
  j["baseline_pa"] = truth.baseline_pa;
  j["lag_hops"] = truth.lag_hops;
  j["drift_hops"] = truth.drift_hops;
  j["audio_samples"] = truth.audio_samples;
  j["impulse_hops"] = truth.impulse_hops;
  j["impulse_voiced"] = json::array();
  for (const auto& [a, b] : truth.impulse_voiced) j["impulse_voiced"].push_back({a, b});
  j["notes"] = json::array();
  for (const auto& n : truth.notes)
    j["notes"].push_back({{"id", n.id},
                          {"base_pitch_midi", n.base_pitch_midi},
                          {"repetition", n.repetition},
                          {"voiced_start_hop", n.voiced_start_hop},
                          {"voiced_end_hop", n.voiced_end_hop},
                          {"apex_hop", n.apex_hop},
                          {"apex_pa", n.apex_pa},
                          {"up_threshold_pa", n.up_threshold_pa},
                          {"down_threshold_pa", n.down_threshold_pa}});
  j["jumps"] = json::array();
  for (const auto& jp : truth.jumps)
    j["jumps"].push_back({{"note_id", jp.note_id},
                          {"hop", jp.hop},
                          {"direction", std::string(to_string(jp.direction))},
                          {"pressure_pa", jp.pressure_pa}});
  return j.dump(2) + "\n";
}

GroundTruth parse_truth(std::string_view text) {
  GroundTruth t;
  try {
    const json j = json::parse(text);
    t.baseline_pa = j.at("baseline_pa").get<double>();
    t.lag_hops = j.at("lag_hops").get<int>();
    t.drift_hops = j.at("drift_hops").get<double>();
    t.audio_samples = j.at("audio_samples").get<std::size_t>();
    t.impulse_hops = j.at("impulse_hops").get<std::vector<double>>();
    for (const auto& p : j.at("impulse_voiced")) t.impulse_voiced.emplace_back(p.at(0), p.at(1));
    for (const auto& n : j.at("notes")) {
      TruthNote tn;
      tn.id = n.at("id");
      tn.base_pitch_midi = n.at("base_pitch_midi");
      tn.repetition = n.at("repetition");
      tn.voiced_start_hop = n.at("voiced_start_hop");
      tn.voiced_end_hop = n.at("voiced_end_hop");
      tn.apex_hop = n.at("apex_hop");
      tn.apex_pa = n.at("apex_pa");
      tn.up_threshold_pa = n.at("up_threshold_pa");
      tn.down_threshold_pa = n.at("down_threshold_pa");
      t.notes.push_back(tn);
    }
    for (const auto& jp : j.at("jumps"))
      t.jumps.push_back({jp.at("note_id").get<int>(), jp.at("hop").get<double>(),
                         parse_direction(jp.at("direction").get<std::string>()),
                         jp.at("pressure_pa").get<double>()});
  } catch (const json::exception& e) {
    throw_input(fmt::format("ground truth: {}", e.what()));
  }
  return t;
}

std::string serialize_script(const SessionScript& s) {
  json j;
  j["notes"] = json::array();
  for (const auto& n : s.notes)
    j["notes"].push_back({{"base_pitch_midi", n.base_pitch_midi},
                          {"repetitions", n.repetitions},
                          {"apex_ratio", n.apex_ratio},
                          {"rise_s", n.rise_s},
                          {"fall_s", n.fall_s},
                          {"rest_s", n.rest_s}});
  j["preamble"] = s.preamble;
  j["impulses"] = {{"groups", s.impulses.groups},
                   {"per_group", s.impulses.per_group},
                   {"spacing_s", s.impulses.spacing_s},
                   {"group_gap_s", s.impulses.group_gap_s},
                   {"pressure_pa", s.impulses.pressure_pa},
                   {"hold_s", s.impulses.hold_s},
                   {"pitch_midi", s.impulses.pitch_midi},
                   {"amplitude", s.impulses.amplitude}};
  j["lead_s"] = s.lead_s;
  j["preamble_rest_s"] = s.preamble_rest_s;
  j["tail_s"] = s.tail_s;
  j["attack_s"] = s.attack_s;
  j["start_u"] = s.start_u;
  j["voice_fraction"] = s.voice_fraction;
  j["note_amplitude"] = s.note_amplitude;
  j["fade_s"] = s.fade_s;
  j["perturb_semitones"] = s.perturb_semitones;
  j["perturb_s"] = s.perturb_s;
  j["baseline_pa"] = s.baseline_pa;
  j["pressure_noise_pa"] = s.pressure_noise_pa;
  j["audio_noise"] = s.audio_noise;
  j["log_interval_min_ms"] = s.log_interval_min_ms;
  j["log_interval_max_ms"] = s.log_interval_max_ms;
  j["lag_hops"] = s.lag_hops;
  j["drift_hops"] = s.drift_hops;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

SessionScript parse_script(std::string_view text) {
  // Every key is optional; missing keys keep the default_script() value.
  SessionScript s = default_script();
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw_input("session script: expected a JSON object");
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("notes")) {
      s.notes.clear();
      for (const auto& n : j.at("notes")) {
        NoteEntry e;
        e.base_pitch_midi = n.at("base_pitch_midi").get<int>();
        e.repetitions = n.value("repetitions", e.repetitions);
        e.apex_ratio = n.value("apex_ratio", e.apex_ratio);
        e.rise_s = n.value("rise_s", e.rise_s);
        e.fall_s = n.value("fall_s", e.fall_s);
        e.rest_s = n.value("rest_s", e.rest_s);
        s.notes.push_back(e);
      }
    }
    get("preamble", s.preamble);
    if (j.contains("impulses")) {
      const auto& i = j.at("impulses");
      s.impulses.groups = i.value("groups", s.impulses.groups);
      s.impulses.per_group = i.value("per_group", s.impulses.per_group);
      s.impulses.spacing_s = i.value("spacing_s", s.impulses.spacing_s);
      s.impulses.group_gap_s = i.value("group_gap_s", s.impulses.group_gap_s);
      s.impulses.pressure_pa = i.value("pressure_pa", s.impulses.pressure_pa);
      s.impulses.hold_s = i.value("hold_s", s.impulses.hold_s);
      s.impulses.pitch_midi = i.value("pitch_midi", s.impulses.pitch_midi);
      s.impulses.amplitude = i.value("amplitude", s.impulses.amplitude);
    }
    get("lead_s", s.lead_s);
    get("preamble_rest_s", s.preamble_rest_s);
    get("tail_s", s.tail_s);
    get("attack_s", s.attack_s);
    get("start_u", s.start_u);
    get("voice_fraction", s.voice_fraction);
    get("note_amplitude", s.note_amplitude);
    get("fade_s", s.fade_s);
    get("perturb_semitones", s.perturb_semitones);
    get("perturb_s", s.perturb_s);
    get("baseline_pa", s.baseline_pa);
    get("pressure_noise_pa", s.pressure_noise_pa);
    get("audio_noise", s.audio_noise);
    get("log_interval_min_ms", s.log_interval_min_ms);
    get("log_interval_max_ms", s.log_interval_max_ms);
    get("lag_hops", s.lag_hops);
    get("drift_hops", s.drift_hops);
    get("seed", s.seed);
  } catch (const json::exception& e) {
    throw_input(fmt::format("session script: {}", e.what()));
  }
  return s;
}

}  // namespace flutekit
