#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flutekit/cli/commands.hpp"
#include "flutekit/cli/pipeline.hpp"
#include "flutekit/cli/plot.hpp"
#include "flutekit/error.hpp"
#include "flutekit/ingest.hpp"
#include "session.hpp"

using namespace flutekit;
using namespace flutekit::cli;
using flutekit::testing::TempDir;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FLUTEKIT_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

// Synthesised default session analysed into dir/features.csv.
void analyze_default(const TempDir& dir) {
  std::ostringstream log;
  cmd_synth({.out_audio = dir / "s.wav", .out_pressure = dir / "p.csv", .out_truth = dir / "t.json",
             .lag_hops = 7},
            log);
  AnalyzeOptions a{.audio = dir / "s.wav", .pressure = dir / "p.csv", .out = dir / "features.csv"};
  a.config.fingerings = flutekit::testing::script_fingerings(default_script());
  cmd_analyze(a, log);
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorKind::input) == 2);
  CHECK(exit_code_for(ErrorKind::alignment) == 3);
  CHECK(exit_code_for(ErrorKind::fit_degenerate) == 4);
  CHECK(exit_code_for(ErrorKind::invalid_model) == 5);
}

TEST_CASE("analyze and fit through the library") {
  TempDir dir;
  analyze_default(dir);
  REQUIRE(fs::exists(dir / "features.csv"));
  REQUIRE(fs::exists(dir / "features.sidecar.json"));
  const auto side = parse_sidecar(read_file(dir / "features.sidecar.json"));
  CHECK(side.segments.size() == 28);
  CHECK(side.alignment.offset_hops == 7);

  std::ostringstream log;
  cmd_fit({.features = dir / "features.csv", .out = dir / "model.json"}, log);
  REQUIRE(fs::exists(dir / "model.json"));
  REQUIRE(fs::exists(dir / "model.report.json"));
  const auto m = parse_model(read_file(dir / "model.json"));
  const auto ref = reference_model();
  CHECK(std::abs(m.bend.meta_slope / ref.bend.meta_slope - 1) < 0.02);
  CHECK(std::abs(m.thresholds.up_intercept / ref.thresholds.up_intercept - 1) < 0.02);

  SUBCASE("manual label equal to the auto value changes nothing") {
    const HopGrid grid;
    const auto table = parse_features_csv(read_file(dir / "features.csv"), grid);
    const auto base = run_fit(table, side, {}, 10.0);
    auto label = base.labels.front();
    label.source = LabelSource::manual;
    const std::vector<ThresholdLabel> stored{label};
    const auto same = run_fit(table, side, stored, 10.0);
    CHECK(serialize_model(same.model) == serialize_model(base.model));

    label.ln_pressure += 0.5;
    const std::vector<ThresholdLabel> moved{label};
    const auto shifted = run_fit(table, side, moved, 10.0);
    const bool up = label.direction == Direction::up;
    const double before = up ? base.model.thresholds.up_intercept : base.model.thresholds.down_intercept;
    const double after = up ? shifted.model.thresholds.up_intercept : shifted.model.thresholds.down_intercept;
    CHECK(after > before);
  }

  SUBCASE("plots are deterministic") {
    for (const auto& kind : plot_kind_names()) {
      PlotOptions p{.which = std::string(kind), .out = dir / "a.svg", .features = dir / "features.csv",
                    .model = dir / "model.json"};
      cmd_plot(p, log);
      p.out = dir / "b.svg";
      cmd_plot(p, log);
      const auto a = read_file(dir / "a.svg");
      CHECK_MESSAGE(a == read_file(dir / "b.svg"), kind);
      CHECK(a.rfind("<svg", 0) == 0);
    }
    cmd_plot({.which = "timeline", .out = dir / "t.svg", .features = dir / "features.csv"}, log);
    CHECK(count(read_file(dir / "t.svg"), "<clipPath") == 3);
    cmd_plot({.which = "hysteresis", .out = dir / "h.svg", .features = dir / "features.csv", .note = 0},
             log);
    const auto h = read_file(dir / "h.svg");
    CHECK(h.find("#1f5fbf") != std::string::npos);
    CHECK(h.find("#c62828") != std::string::npos);
    CHECK(h.find("up ") != std::string::npos);
    CHECK(h.find("down ") != std::string::npos);
  }
}

TEST_CASE("binary exit codes") {
  TempDir dir;
  CHECK(run("analyze --audio " + quoted(dir / "none.wav") + " --pressure " + quoted(dir / "none.csv") +
            " --out " + quoted(dir / "f.csv")) == 2);
  CHECK(run("no-such-command") != 0);

  SUBCASE("silent audio") {
    AudioBuffer silent{std::vector<double>(22050 * 3, 0.0), 22050.0};
    write_file(dir / "quiet.wav", encode_wav_pcm16(silent));
    write_file(dir / "p.csv", "t_ms,p_pa\n0,101300\n3000,101300\n");
    try {
      run_analysis(read_file(dir / "quiet.wav"), read_file(dir / "p.csv"), {});
      FAIL("expected an input error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::input);
      CHECK(std::string(e.what()).find("cannot estimate atmosphere") != std::string::npos);
    }
    CHECK(run("analyze --audio " + quoted(dir / "quiet.wav") + " --pressure " + quoted(dir / "p.csv") +
              " --out " + quoted(dir / "f.csv")) == 2);
  }

  SUBCASE("one fingering cannot fit thresholds") {
    auto s = flutekit::testing::short_script();
    s.notes = {NoteEntry{.base_pitch_midi = 74, .repetitions = 2}};
    write_file(dir / "script.json", serialize_script(s));
    REQUIRE(run("synth --script " + quoted(dir / "script.json") + " --out-audio " + quoted(dir / "s.wav") +
                " --out-pressure " + quoted(dir / "p.csv") + " --out-truth " + quoted(dir / "t.json")) == 0);
    REQUIRE(run("analyze --audio " + quoted(dir / "s.wav") + " --pressure " + quoted(dir / "p.csv") +
                " --out " + quoted(dir / "f.csv") + " --fingerings 74 --repeats 2") == 0);
    CHECK(run("fit --features " + quoted(dir / "f.csv") + " --out " + quoted(dir / "m.json")) == 4);
  }

  SUBCASE("inverted model is rejected") {
    auto m = reference_model();
    write_file(dir / "good.json", serialize_model(m));
    std::swap(m.thresholds.up_intercept, m.thresholds.down_intercept);
    write_file(dir / "bad.json", serialize_model(m));
    write_file(dir / "trace.csv", "pressure_pa\n100\n300\n100\n");
    CHECK(run("simulate --pitch 72 --model " + quoted(dir / "bad.json") + " --trace " + quoted(dir / "trace.csv") +
              " --out " + quoted(dir / "o.csv")) == 5);
    CHECK(run("simulate --pitch 72 --model " + quoted(dir / "good.json") + " --trace " + quoted(dir / "trace.csv") +
              " --out " + quoted(dir / "o.csv")) == 0);
  }
}

TEST_CASE("simulate a triangle") {
  TempDir dir;
  write_file(dir / "model.json", serialize_model(reference_model()));
  std::string trace = "pressure_pa\n";
  for (int i = 0; i <= 100; ++i) trace += std::to_string(100 + 3 * i) + "\n";
  for (int i = 99; i >= 0; --i) trace += std::to_string(100 + 3 * i) + "\n";
  write_file(dir / "trace.csv", trace);
  std::ostringstream log;
  cmd_simulate({.model = dir / "model.json", .trace = dir / "trace.csv", .out = dir / "out.csv"}, log);
  const auto out = read_file(dir / "out.csv");
  CHECK(out.rfind("index,pressure_pa,register,sounding_pitch,q,bend,f_hz,valid,jump\n", 0) == 0);
  CHECK(count(out, ",up\n") == 1);
  CHECK(count(out, ",down\n") == 1);
  CHECK(count(out, "\n") == 202);
}

TEST_CASE("trace csv parsing") {
  CHECK(parse_trace_csv("pressure_pa\n1\n2.5\n") == std::vector<double>{1.0, 2.5});
  CHECK_THROWS_AS(parse_trace_csv("p\n1\n"), Error);
  CHECK_THROWS_AS(parse_trace_csv("pressure_pa\nabc\n"), Error);
}

TEST_CASE("fingering list parsing") {
  CHECK(parse_fingerings("72,74", 2) == std::vector<int>{72, 72, 74, 74});
  CHECK_THROWS_AS(parse_fingerings("72,x", 1), Error);
  CHECK_THROWS_AS(parse_fingerings("72", 0), Error);
}
