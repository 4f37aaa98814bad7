#include <CLI11.hpp>
#include <csignal>
#include <iostream>

#include "flutekit/cli/commands.hpp"
#include "flutekit/cli/label_server.hpp"
#include "flutekit/cli/plot.hpp"

namespace {

using namespace flutekit;
using namespace flutekit::cli;

cli::LabelServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

void add_grid_options(CLI::App& cmd, HopGrid& grid) {
  cmd.add_option("--sr", grid.sample_rate, "analysis sample rate (Hz)")->capture_default_str();
  cmd.add_option("--hop", grid.hop, "hop length (samples)")->capture_default_str();
  cmd.add_option("--window", grid.window, "page length (samples)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flute breath-pressure analysis and model fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "flutekit 0.3.0");

  AnalyzeOptions analyze;
  std::string fingerings;
  int repeats = 1;
  std::string sidecar_out;
  auto* a = app.add_subcommand("analyze", "extract, align and segment one session");
  a->add_option("--audio", analyze.audio, "WAV recording")->required();
  a->add_option("--pressure", analyze.pressure, "pressure log CSV (t_ms,p_pa)")->required();
  a->add_option("--out", analyze.out, "features CSV to write")->required();
  a->add_option("--sidecar", sidecar_out, "sidecar JSON (default: next to --out)");
  add_grid_options(*a, analyze.config.grid);
  a->add_option("--fmin", analyze.config.yin.f_min)->capture_default_str();
  a->add_option("--fmax", analyze.config.yin.f_max)->capture_default_str();
  a->add_option("--yin-threshold", analyze.config.yin.threshold)->capture_default_str();
  a->add_option("--silence", analyze.config.segment.silence_threshold,
                "silence threshold, fraction of max amplitude")
      ->capture_default_str();
  a->add_option("--jump-window-ms", analyze.config.segment.disequilibrium_ms)
      ->capture_default_str();
  a->add_option("--fingerings", fingerings,
                "comma-separated base pitches in playing order (MIDI)");
  a->add_option("--repeats", repeats, "consecutive repetitions of each fingering")
      ->capture_default_str();

  FitOptions fit;
  std::string fit_sidecar, fit_labels, fit_report;
  auto* f = app.add_subcommand("fit", "fit the bend and threshold model");
  f->add_option("--features", fit.features)->required();
  f->add_option("--sidecar", fit_sidecar);
  f->add_option("--labels", fit_labels, "labels JSON; manual entries override auto labels");
  f->add_option("--out", fit.out, "model JSON to write")->required();
  f->add_option("--report", fit_report, "fit report JSON (default: <out>.report.json)");
  f->add_option("--power", fit.power)->capture_default_str();

  SimulateOptions sim;
  std::string initial = "low";
  auto* s = app.add_subcommand("simulate", "run a pressure trace through a model");
  s->add_option("--model", sim.model)->required();
  s->add_option("--pitch", sim.pitch, "fingering base pitch (MIDI)")->required();
  s->add_option("--trace", sim.trace, "CSV with one pressure_pa column")->required();
  s->add_option("--out", sim.out)->required();
  s->add_option("--initial", initial)->check(CLI::IsMember({"low", "high"}))->capture_default_str();

  SynthOptions synth;
  std::string synth_model, synth_script;
  int lag = 0;
  std::uint64_t seed = 0;
  auto* y = app.add_subcommand("synth", "generate a synthetic recording session");
  y->add_option("--model", synth_model, "model JSON (default: reference constants)");
  y->add_option("--script", synth_script, "session script JSON (default: built-in protocol)");
  y->add_option("--out-audio", synth.out_audio)->required();
  y->add_option("--out-pressure", synth.out_pressure)->required();
  y->add_option("--out-truth", synth.out_truth)->required();
  auto* lag_opt = y->add_option("--lag", lag, "pressure lag in hops");
  auto* seed_opt = y->add_option("--seed", seed);

  PlotOptions plot;
  std::string plot_sidecar, plot_model, plot_labels;
  int note = -1;
  auto* p = app.add_subcommand("plot", "render an SVG figure");
  std::vector<std::string> kinds;
  for (auto k : plot_kind_names()) kinds.emplace_back(k);
  p->add_option("--which", plot.which)->required()->check(CLI::IsMember(kinds));
  p->add_option("--out", plot.out)->required();
  p->add_option("--features", plot.features)->required();
  p->add_option("--sidecar", plot_sidecar);
  p->add_option("--model", plot_model);
  p->add_option("--labels", plot_labels);
  auto* note_opt = p->add_option("--note", note, "note id for the hysteresis plot");
  p->add_option("--power", plot.power)->capture_default_str();

  LabelServerConfig label;
  std::string label_sidecar, ui_dir, host = "127.0.0.1";
  int port = 8080;
  auto* l = app.add_subcommand("label", "serve the labeling API");
  l->add_option("--features", label.features)->required();
  l->add_option("--sidecar", label_sidecar);
  l->add_option("--labels", label.labels)->required();
  l->add_option("--port", port)->capture_default_str();
  l->add_option("--host", host)->capture_default_str();
  l->add_option("--ui-dir", ui_dir, "directory of built UI assets");

  CLI11_PARSE(app, argc, argv);

  auto opt_path = [](const std::string& v) -> std::optional<fs::path> {
    if (v.empty()) return std::nullopt;
    return fs::path(v);
  };

  try {
    if (*a) {
      analyze.sidecar = opt_path(sidecar_out);
      if (!fingerings.empty()) analyze.config.fingerings = parse_fingerings(fingerings, repeats);
      cmd_analyze(analyze, std::cout);
    } else if (*f) {
      fit.sidecar = opt_path(fit_sidecar);
      fit.labels = opt_path(fit_labels);
      fit.report = opt_path(fit_report);
      cmd_fit(fit, std::cout);
    } else if (*s) {
      sim.initial = initial == "high" ? Register::high : Register::low;
      cmd_simulate(sim, std::cout);
    } else if (*y) {
      synth.model = opt_path(synth_model);
      synth.script = opt_path(synth_script);
      if (lag_opt->count()) synth.lag_hops = lag;
      if (seed_opt->count()) synth.seed = seed;
      cmd_synth(synth, std::cout);
    } else if (*p) {
      plot.sidecar = opt_path(plot_sidecar);
      plot.model = opt_path(plot_model);
      plot.labels = opt_path(plot_labels);
      if (note_opt->count()) plot.note = note;
      cmd_plot(plot, std::cout);
    } else if (*l) {
      label.sidecar = opt_path(label_sidecar);
      label.ui_dir = opt_path(ui_dir);
      LabelServer server(label);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << "/" << std::endl;
      server.run();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
