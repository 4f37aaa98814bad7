#include <fmt/format.h>

#include <cmath>
#include <json.hpp>

#include "flutekit/error.hpp"
#include "flutekit/fit.hpp"

namespace flutekit {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw_input(fmt::format("{}: invalid JSON ({})", what, e.what()));
  }
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw_input(fmt::format("model: missing numeric field '{}'", key));
  return j.at(key).get<double>();
}

}  // namespace

std::string serialize_model(const FluteModel& model) {
  json j = json::object();
  j["power"] = model.bend.power;
  j["common_slope"] = model.bend.common_slope;
  j["meta_slope"] = model.bend.meta_slope;
  j["meta_intercept"] = model.bend.meta_intercept;
  j["thr_slope"] = model.thresholds.slope;
  j["thr_up_intercept"] = model.thresholds.up_intercept;
  j["thr_down_intercept"] = model.thresholds.down_intercept;
  j["pitch_convention"] = "midi";
  j["pressure_convention"] = "pa_gauge";
  return j.dump(2) + "\n";
}

FluteModel parse_model(std::string_view text) {
  const json j = parse_json(text, "model");
  if (!j.is_object()) throw_input("model: expected a JSON object");
  if (j.contains("pitch_convention") && j.at("pitch_convention") != "midi")
    throw_input("model: unsupported pitch_convention");
  if (j.contains("pressure_convention") && j.at("pressure_convention") != "pa_gauge")
    throw_input("model: unsupported pressure_convention");
  FluteModel m;
  m.bend.power = number_field(j, "power");
  m.bend.common_slope = number_field(j, "common_slope");
  m.bend.meta_slope = number_field(j, "meta_slope");
  m.bend.meta_intercept = number_field(j, "meta_intercept");
  m.thresholds.slope = number_field(j, "thr_slope");
  m.thresholds.up_intercept = number_field(j, "thr_up_intercept");
  m.thresholds.down_intercept = number_field(j, "thr_down_intercept");
  return m;
}

std::string serialize_labels(std::span<const ThresholdLabel> labels) {
  json arr = json::array();
  for (const auto& l : labels) {
    arr.push_back({{"note_id", l.note_id},
                   {"pitch_midi", l.pitch_midi},
                   {"direction", std::string(to_string(l.direction))},
                   {"ln_pressure", l.ln_pressure},
                   {"source", std::string(to_string(l.source))}});
  }
  return arr.dump(2) + "\n";
}

std::vector<ThresholdLabel> parse_labels(std::string_view text) {
  const json j = parse_json(text, "labels");
  if (!j.is_array()) throw_input("labels: expected a JSON array");
  std::vector<ThresholdLabel> out;
  for (const auto& e : j) {
    if (!e.is_object()) throw_input("labels: entries must be objects");
    for (const char* key : {"note_id", "pitch_midi", "ln_pressure"})
      if (!e.contains(key) || !e.at(key).is_number())
        throw_input(fmt::format("labels: missing numeric field '{}'", key));
    for (const char* key : {"direction", "source"})
      if (!e.contains(key) || !e.at(key).is_string())
        throw_input(fmt::format("labels: missing string field '{}'", key));
    ThresholdLabel l;
    l.note_id = e.at("note_id").get<int>();
    l.pitch_midi = e.at("pitch_midi").get<int>();
    l.ln_pressure = e.at("ln_pressure").get<double>();
    if (!std::isfinite(l.ln_pressure)) throw_input("labels: ln_pressure must be finite");
    l.direction = parse_direction(e.at("direction").get<std::string>());
    l.source = parse_label_source(e.at("source").get<std::string>());
    out.push_back(l);
  }
  return out;
}

}  // namespace flutekit
