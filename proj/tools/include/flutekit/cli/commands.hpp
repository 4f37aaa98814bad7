#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flutekit/cli/pipeline.hpp"
#include "flutekit/error.hpp"
#include "flutekit/model.hpp"

namespace flutekit::cli {

namespace fs = std::filesystem;

/// 2 input, 3 alignment, 4 fit degenerate, 5 invalid model.
int exit_code_for(ErrorKind kind);

struct AnalyzeOptions {
  fs::path audio;
  fs::path pressure;
  fs::path out;
  std::optional<fs::path> sidecar;  // default: sidecar_path_for(out)
  PipelineConfig config;
};

void cmd_analyze(const AnalyzeOptions& opts, std::ostream& log);

struct FitOutcome {
  FluteModel model;
  BendFitReport bend;
  std::vector<ThresholdLabel> labels;
  std::string report_json;
};

/// Bend fit on the feature table plus threshold fit on the effective
/// labels (auto from the sidecar, manual entries from `stored` override).
FitOutcome run_fit(const FeatureTable& table, const Sidecar& sidecar,
                   std::span<const ThresholdLabel> stored, double power);

struct FitOptions {
  fs::path features;
  std::optional<fs::path> sidecar;
  std::optional<fs::path> labels;
  fs::path out;
  std::optional<fs::path> report;  // default: <out stem>.report.json
  double power = 10.0;
};

void cmd_fit(const FitOptions& opts, std::ostream& log);

/// One gauge pressure per line under a `pressure_pa` header.
std::vector<double> parse_trace_csv(std::string_view text);
std::string serialize_trace_csv(std::span<const TracePoint> points, std::span<const double> trace);

struct SimulateOptions {
  fs::path model;
  fs::path trace;
  fs::path out;
  double pitch = 72.0;
  Register initial = Register::low;
};

void cmd_simulate(const SimulateOptions& opts, std::ostream& log);

struct SynthOptions {
  std::optional<fs::path> model;   // default: the reference constants
  std::optional<fs::path> script;  // default: default_script()
  fs::path out_audio;
  fs::path out_pressure;
  fs::path out_truth;
  std::optional<int> lag_hops;
  std::optional<std::uint64_t> seed;
};

void cmd_synth(const SynthOptions& opts, std::ostream& log);

struct PlotOptions {
  std::string which;
  fs::path out;
  fs::path features;
  std::optional<fs::path> sidecar;
  std::optional<fs::path> model;
  std::optional<fs::path> labels;
  std::optional<int> note;
  double power = 10.0;
};

void cmd_plot(const PlotOptions& opts, std::ostream& log);

}  // namespace flutekit::cli
