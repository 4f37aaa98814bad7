#pragma once

// End-to-end analysis pipeline and the JSON sidecar that carries its
// provenance (alignment, segments, sweeps, jump events) next to the
// features CSV.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flutekit/align.hpp"
#include "flutekit/features.hpp"
#include "flutekit/fit.hpp"
#include "flutekit/segment.hpp"

namespace flutekit::cli {

struct PipelineConfig {
  HopGrid grid;
  YinParams yin;
  AlignParams align;
  SegmentParams segment;
  double power = 10.0;
  std::vector<int> fingerings;  // one base pitch per note, optional
};

struct Sidecar {
  HopGrid grid;
  TableMeta meta;
  AlignmentResult alignment;
  std::string drift_warning;
  std::vector<NoteSegment> segments;
  std::vector<Sweep> sweeps;
  std::vector<JumpEvent> events;
};

struct Analysis {
  FeatureTable table;
  Sidecar sidecar;
};

/// ingest -> features -> align -> zero -> segment -> clean.
Analysis run_analysis(std::string_view audio_bytes, std::string_view pressure_log,
                      const PipelineConfig& config);

std::string serialize_sidecar(const Sidecar& sidecar);
Sidecar parse_sidecar(std::string_view json);

/// `session.csv` -> `session.sidecar.json`.
std::filesystem::path sidecar_path_for(const std::filesystem::path& features_csv);

/// Auto labels from the sidecar, overridden by the manual entries in `stored`.
std::vector<ThresholdLabel> effective_labels(const Sidecar& sidecar,
                                             std::span<const ThresholdLabel> stored);

/// "72,74,76" expanded by `repeats` -> {72 x repeats, 74 x repeats, ...}.
std::vector<int> parse_fingerings(std::string_view list, int repeats);

}  // namespace flutekit::cli
