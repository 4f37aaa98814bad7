#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flutekit/cli/pipeline.hpp"
#include "flutekit/fit.hpp"

namespace flutekit::cli {

enum class PlotKind {
  timeline,
  bend_scatter,
  bend_linear,
  xintercepts,
  model_overlay,
  hysteresis,
  thresholds,
  amplitude
};

std::string_view to_string(PlotKind kind);
/// Throws Error(input) for an unknown name.
PlotKind parse_plot_kind(std::string_view name);
std::vector<std::string_view> plot_kind_names();

struct PlotInputs {
  const FeatureTable* table = nullptr;
  const Sidecar* sidecar = nullptr;
  std::optional<FluteModel> model;     // fitted from the table when absent and needed
  std::vector<ThresholdLabel> labels;  // effective labels
  std::optional<int> note;             // hysteresis plot
  double power = 10.0;
};

/// Throws Error(input) when an input the chosen plot needs is missing.
std::string render_plot(PlotKind kind, const PlotInputs& in);

}  // namespace flutekit::cli
