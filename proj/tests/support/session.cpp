#include "session.hpp"

#include <atomic>
#include <random>
#include <unistd.h>

namespace flutekit::testing {

std::vector<int> script_fingerings(const SessionScript& script) {
  std::vector<int> out;
  for (const auto& n : script.notes)
    for (int r = 0; r < n.repetitions; ++r) out.push_back(n.base_pitch_midi);
  return out;
}

cli::PipelineConfig config_for(const SessionScript& script) {
  cli::PipelineConfig config;
  config.fingerings = script_fingerings(script);
  return config;
}

AnalyzedSession analyze_script(const SessionScript& script, const FluteModel& model) {
  AnalyzedSession s;
  s.script = script;
  s.files = generate_session(script, model);
  s.analysis = cli::run_analysis(s.files.wav, s.files.pressure_csv, config_for(script));
  return s;
}

const AnalyzedSession& default_session() {
  static const AnalyzedSession session = [] {
    auto script = default_script();
    script.lag_hops = 7;
    return analyze_script(script, reference_model());
  }();
  return session;
}

SessionScript short_script() {
  auto s = default_script();
  s.notes = {NoteEntry{.base_pitch_midi = 72, .repetitions = 1},
             NoteEntry{.base_pitch_midi = 79, .repetitions = 1}};
  return s;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("flutekit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd() % 100000));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace flutekit::testing
