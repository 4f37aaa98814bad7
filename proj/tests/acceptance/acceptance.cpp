// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fail.

#include <Eigen/Dense>
#include <fmt/core.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "flutekit/align.hpp"
#include "flutekit/cli/commands.hpp"
#include "flutekit/cli/pipeline.hpp"
#include "flutekit/features.hpp"
#include "flutekit/fit.hpp"
#include "flutekit/generator.hpp"
#include "flutekit/ingest.hpp"
#include "flutekit/model.hpp"
#include "session.hpp"

using namespace flutekit;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kParsevalTol = 1e-9;
constexpr double kParsevalSeconds = 1.0;
constexpr double kYinCents = 10.0;
constexpr double kYinSeconds = 5.0;
constexpr double kResampleTol = 1e-9;
constexpr double kResampleSeconds = 1.0;
constexpr int kDriftTolHops = 1;
constexpr int kDisequilibriumHops = 13;
constexpr double kThresholdTol = 1e-9;
constexpr double kBandRatio = 1.2200;
constexpr double kBandRatioTol = 5e-5;
constexpr double kOracleTol = 1e-9;
constexpr double kNoiselessTol = 1e-6;
constexpr double kRoundTripTol = 0.02;
constexpr double kRoundTripSeconds = 60.0;

constexpr double kA = 0.09498625513471028;
constexpr double kB = -3.177222804229106;
constexpr double kC = 0.12067771159663639;
constexpr double kUp = -3.0908617599208004;
constexpr double kDown = -3.289717945484731;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

Outcome parseval() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<std::vector<double>> pages(1000, std::vector<double>(2048));
  for (auto& p : pages)
    for (auto& x : p) x = g(rng);
  const auto t0 = Clock::now();
  Periodogram pg(2048);
  double worst = 0.0;
  for (const auto& p : pages) {
    double ms = 0.0;
    for (double x : p) ms += x * x;
    ms /= 2048.0;
    worst = std::max(worst, rel_err(pg.amplitude(p), ms));
  }
  const double dt = seconds_since(t0);
  return {worst <= kParsevalTol && dt < kParsevalSeconds,
          fmt::format("max rel err {:.3g}, {:.3f} s", worst, dt)};
}

Outcome yin() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int octave_errors = 0, unvoiced = 0;
  const double h = std::pow(10.0, -12.0 / 20.0);
  std::vector<double> page(2048);
  for (int i = 0; i < 50; ++i) {
    const double f = 220.0 * std::pow(2000.0 / 220.0, i / 49.0);
    for (int harmonics : {0, 1}) {
      for (std::size_t n = 0; n < page.size(); ++n) {
        const double w = 2 * M_PI * f * static_cast<double>(n) / 22050.0;
        page[n] = std::sin(w) + harmonics * h * (std::sin(3 * w) + std::sin(5 * w));
      }
      const auto est = yin_f0(page, 22050.0);
      if (!est) {
        ++unvoiced;
        continue;
      }
      const double cents = std::abs(1200.0 * std::log2(*est / f));
      if (harmonics == 0) worst = std::max(worst, cents);
      if (cents > 600.0) ++octave_errors;
    }
  }
  const double dt = seconds_since(t0);
  return {worst < kYinCents && octave_errors == 0 && unvoiced == 0 && dt < kYinSeconds,
          fmt::format("max {:.3f} cents, {} octave errors, {} unvoiced, {:.3f} s", worst, octave_errors,
                      unvoiced, dt)};
}

Outcome resampler() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PressureSeries> series;
  std::vector<std::pair<double, double>> coeffs;
  for (int trial = 0; trial < 50; ++trial) {
    PressureSeries s;
    const double slope = 400.0 * (u(rng) - 0.5), icpt = 1e5 + 3000.0 * u(rng);
    for (double t = 0.0; t < 30000.0; t += 5.0 + 10.0 * u(rng)) s.samples.push_back({t, slope * t / 1000.0 + icpt});
    series.push_back(std::move(s));
    coeffs.emplace_back(slope, icpt);
  }
  const HopGrid grid;
  const auto n = static_cast<std::size_t>(29.0 * grid.hop_rate());
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto out = resample_pressure(series[i], grid, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double want = coeffs[i].first * grid.hop_time_s(static_cast<std::int64_t>(k)) + coeffs[i].second;
      worst = std::max(worst, rel_err(out[k], want));
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= kResampleTol && dt < kResampleSeconds,
          fmt::format("max rel err {:.3g} over {} hops, {:.3f} s", worst, n * series.size(), dt)};
}

Outcome alignment() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> j(-0.4, 0.4);
  int wrong = 0;
  for (int lag = -200; lag <= 200; ++lag) {
    OnsetList au, pr;
    for (int k = 0; k < 10; ++k) {
      const double t = 300.0 + (k < 5 ? 13.0 * k : 100.0 + 13.0 * k);
      au.hops.push_back(static_cast<int>(std::lround(t + j(rng))));
      pr.hops.push_back(static_cast<int>(std::lround(t + lag + j(rng))));
    }
    if (estimate_offset(au, pr, 400).offset_hops != lag) ++wrong;
  }
  int session_wrong = 0, worst_drift = 0, missing = 0;
  for (int lag : {-150, -40, 0, 7, 90, 200}) {
    auto s = flutekit::testing::short_script();
    s.lag_hops = lag;
    s.lead_s = 6.0;
    const auto run = flutekit::testing::analyze_script(s, reference_model());
    const auto& a = run.analysis.sidecar.alignment;
    if (a.offset_hops != lag) ++session_wrong;
    if (!a.drift_hops) ++missing;
    else worst_drift = std::max(worst_drift, std::abs(*a.drift_hops));
  }
  return {wrong == 0 && session_wrong == 0 && missing == 0 && worst_drift <= kDriftTolHops,
          fmt::format("{} of 401 onset lags wrong, {} of 6 sessions wrong, max |drift| {} hops", wrong,
                      session_wrong, worst_drift)};
}

Outcome disequilibrium() {
  const auto& s = flutekit::testing::default_session();
  const auto& t = s.analysis.table;
  int violations = 0;
  for (const auto& jmp : s.files.truth.jumps) {
    const int lo = static_cast<int>(std::ceil(jmp.hop - kDisequilibriumHops));
    const int hi = static_cast<int>(std::floor(jmp.hop + kDisequilibriumHops));
    for (int k = std::max(lo, 0); k <= hi && k < static_cast<int>(t.size()); ++k)
      if (t.records[k].retained()) ++violations;
  }
  const int window = disequilibrium_window_hops(HopGrid{}, 300.0);
  return {violations == 0 && window == kDisequilibriumHops && s.files.truth.jumps.size() == 56,
          fmt::format("{} injected jumps, window {} hops, {} retained hops inside", s.files.truth.jumps.size(),
                      window, violations)};
}

Outcome thresholds() {
  std::vector<ThresholdLabel> labels;
  int id = 0;
  for (int p : {72, 74, 76, 77, 79, 81, 83})
    for (int r = 0; r < 4; ++r, ++id) {
      labels.push_back({id, p, Direction::up, kC * p + kUp, LabelSource::automatic});
      labels.push_back({id, p, Direction::down, kC * p + kDown, LabelSource::automatic});
    }
  const auto m = fit_threshold_model(labels);
  const double err = std::max({std::abs(m.slope - kC), std::abs(m.up_intercept - kUp),
                               std::abs(m.down_intercept - kDown)});
  const auto model = reference_model();
  double band = 0.0;
  for (int p = 48; p <= 108; ++p)
    band = std::max(band, std::abs(up_threshold_pa(model, p) / down_threshold_pa(model, p) - kBandRatio));
  return {err <= kThresholdTol && band <= kBandRatioTol,
          fmt::format("max abs err {:.3g}, band ratio {:.6f}", err,
                      up_threshold_pa(model, 72) / down_threshold_pa(model, 72))};
}

Eigen::VectorXd design_lstsq(const PointGroups& groups) {
  std::size_t n = 0;
  for (const auto& [k, pts] : groups) n += pts.size();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1 + static_cast<Eigen::Index>(groups.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  Eigen::Index row = 0, col = 1;
  for (const auto& [k, pts] : groups) {
    for (const auto& p : pts) {
      X(row, 0) = p.x;
      X(row, col) = 1.0;
      y(row++) = p.y;
    }
    ++col;
  }
  return X.colPivHouseholderQr().solve(y);
}

Outcome bend_fit() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ng(1, 8), np(2, 40);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    PointGroups g;
    const double slope = u(rng);
    for (int i = 0, groups = ng(rng); i < groups; ++i) {
      const double icpt = u(rng), x0 = u(rng);
      for (int j = 0, n = np(rng); j < n; ++j) {
        const double x = x0 + u(rng);
        g[60 + i].push_back({x, slope * x + icpt + noise(rng)});
      }
    }
    const auto c = fit_common_slope(g);
    const auto beta = design_lstsq(g);
    const auto scaled = [](double got, double want) {
      return std::abs(got - want) / std::max(1.0, std::abs(want));
    };
    worst_oracle = std::max(worst_oracle, scaled(c.slope, beta(0)));
    Eigen::Index col = 1;
    for (const auto& [k, pts] : g) worst_oracle = std::max(worst_oracle, scaled(c.intercepts.at(k), beta(col++)));
  }
  double worst_noiseless = 0.0;
  for (double s : {0.5, 1.0, 2.0}) {
    BendSampleSet set;
    for (int pitch : {72, 74, 76, 77, 79, 81, 83, 84, 86, 88, 89, 91, 93, 95}) {
      const double xi = kA * pitch + kB;
      for (int i = 0; i < 30; ++i) {
        const double x = xi + (-0.8 + 1.6 * i / 29.0) / s;
        set.groups[pitch].push_back({x, std::pow(1.0 + s * (x - xi), 0.1), pitch});
      }
    }
    const auto r = fit_bend_model(set, 10.0);
    worst_noiseless = std::max({worst_noiseless, rel_err(r.model.common_slope, s),
                                rel_err(r.model.meta_slope, kA), rel_err(r.model.meta_intercept, kB)});
  }
  return {worst_oracle <= kOracleTol && worst_noiseless <= kNoiselessTol,
          fmt::format("oracle max err {:.3g}, noiseless max rel err {:.3g}", worst_oracle, worst_noiseless)};
}

Outcome round_trip() {
  flutekit::testing::TempDir dir;
  const auto t0 = Clock::now();
  std::ostringstream log;
  cli::cmd_synth({.out_audio = dir / "s.wav", .out_pressure = dir / "p.csv", .out_truth = dir / "t.json",
                  .lag_hops = 7},
                 log);
  cli::AnalyzeOptions a{.audio = dir / "s.wav", .pressure = dir / "p.csv", .out = dir / "f.csv"};
  a.config.fingerings = flutekit::testing::script_fingerings(default_script());
  cli::cmd_analyze(a, log);
  cli::cmd_fit({.features = dir / "f.csv", .out = dir / "m.json"}, log);
  const double dt = seconds_since(t0);

  const auto side = cli::parse_sidecar(read_file(dir / "f.sidecar.json"));
  const auto m = parse_model(read_file(dir / "m.json"));
  const auto report = nlohmann::json::parse(read_file(dir / "m.report.json"));
  const int ups = report["labels"]["up_auto"], downs = report["labels"]["down_auto"];
  const auto ref = reference_model();
  const double ea = rel_err(m.bend.meta_slope, ref.bend.meta_slope);
  const double eb = rel_err(m.bend.meta_intercept, ref.bend.meta_intercept);
  const double ec = rel_err(m.thresholds.slope, ref.thresholds.slope);
  const double eu = rel_err(m.thresholds.up_intercept, ref.thresholds.up_intercept);
  const double ed = rel_err(m.thresholds.down_intercept, ref.thresholds.down_intercept);
  const double worst = std::max({ea, eb, ec, eu, ed});
  return {worst <= kRoundTripTol && side.segments.size() == 28 && ups == 28 && downs == 28 &&
              side.alignment.offset_hops == 7 && dt < kRoundTripSeconds,
          fmt::format("rel err a {:.4f} b {:.4f} c {:.4f} up {:.4f} down {:.4f}; {} segments, {}+{} "
                      "labels, lag {}, {:.1f} s",
                      ea, eb, ec, eu, ed, side.segments.size(), ups, downs, side.alignment.offset_hops, dt)};
}

FluteModel band_model() {
  auto m = reference_model();
  m.thresholds.up_intercept = std::log(145.0) - m.thresholds.slope * 72;
  m.thresholds.down_intercept = std::log(105.0) - m.thresholds.slope * 72;
  return m;
}

Outcome hysteresis() {
  const auto m = reference_model();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_alternation = 0, total_jumps = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double base = 72 + std::floor(12 * u(rng));
    const double lo = 0.5 * down_threshold_pa(m, base), hi = 1.5 * up_threshold_pa(m, base);
    std::vector<double> trace(300);
    double p = lo + (hi - lo) * u(rng);
    for (auto& x : trace) {
      p = std::clamp(p + (hi - lo) * 0.15 * (u(rng) - 0.5), lo, hi);
      x = p;
    }
    const auto pts = simulate_trace(m, base, trace, {u(rng) < 0.5 ? Register::low : Register::high});
    std::optional<Direction> last;
    for (const auto& pt : pts) {
      if (!pt.jumped) continue;
      ++total_jumps;
      if (last && *last == *pt.jumped) ++bad_alternation;
      last = pt.jumped;
    }
  }
  int band_jumps = 0;
  for (int base = 72; base <= 95; ++base)
    for (double f : {0.001, 0.25, 0.5, 0.75, 0.999}) {
      const double lo = down_threshold_pa(m, base), hi = up_threshold_pa(m, base);
      const std::vector<double> trace(50, lo + f * (hi - lo));
      for (Register r : {Register::low, Register::high})
        for (const auto& pt : simulate_trace(m, base, trace, {r})) band_jumps += pt.jumped ? 1 : 0;
    }
  const auto fm = band_model();
  const std::vector<double> canonical = {100, 150, 120, 100};
  std::vector<Register> regs;
  for (const auto& pt : simulate_trace(fm, 72, canonical)) regs.push_back(pt.reg);
  const bool canon = regs == std::vector<Register>{Register::low, Register::high, Register::high, Register::low};
  return {bad_alternation == 0 && band_jumps == 0 && canon && total_jumps > 0,
          fmt::format("{} jumps over 1000 traces, {} non-alternating, {} in-band jumps, canonical {}",
                      total_jumps, bad_alternation, band_jumps, canon ? "ok" : "wrong")};
}

Outcome determinism() {
  flutekit::testing::TempDir dir;
  std::ostringstream log;
  auto script = flutekit::testing::short_script();
  write_file(dir / "script.json", serialize_script(script));
  cli::cmd_synth({.script = dir / "script.json", .out_audio = dir / "s.wav", .out_pressure = dir / "p.csv",
                  .out_truth = dir / "t.json"},
                 log);
  cli::AnalyzeOptions a{.audio = dir / "s.wav", .pressure = dir / "p.csv", .out = dir / "f.csv"};
  a.config.fingerings = flutekit::testing::script_fingerings(script);
  cli::cmd_analyze(a, log);
  const auto csv1 = read_file(dir / "f.csv"), side1 = read_file(dir / "f.sidecar.json");
  cli::cmd_analyze(a, log);
  const bool analyze_same = csv1 == read_file(dir / "f.csv") && side1 == read_file(dir / "f.sidecar.json");
  int plot_diffs = 0, plots = 0;
  for (const char* which : {"timeline", "bend_scatter", "hysteresis", "amplitude"}) {
    cli::PlotOptions p{.which = which, .out = dir / "a.svg", .features = dir / "f.csv"};
    cli::cmd_plot(p, log);
    const auto first = read_file(dir / "a.svg");
    cli::cmd_plot(p, log);
    ++plots;
    if (first != read_file(dir / "a.svg")) ++plot_diffs;
  }
  return {analyze_same && plot_diffs == 0,
          fmt::format("analyze {}, {} of {} plots differ", analyze_same ? "identical" : "differs", plot_diffs,
                      plots)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"parseval-amplitude", parseval},
      {"yin-accuracy", yin},
      {"resampler-exactness", resampler},
      {"alignment", alignment},
      {"disequilibrium-removal", disequilibrium},
      {"threshold-regression", thresholds},
      {"two-layer-bend-fit", bend_fit},
      {"end-to-end-round-trip", round_trip},
      {"hysteresis-properties", hysteresis},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
