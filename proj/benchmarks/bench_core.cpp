#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "flutekit/features.hpp"
#include "flutekit/generator.hpp"
#include "flutekit/ingest.hpp"
#include "flutekit/model.hpp"

using namespace flutekit;

namespace {

std::vector<double> tone_page(double f, std::size_t n = 2048) {
  std::vector<double> page(n);
  for (std::size_t i = 0; i < n; ++i) page[i] = std::sin(2 * M_PI * f * i / 22050.0);
  return page;
}

void BM_Yin(benchmark::State& state) {
  const auto page = tone_page(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(yin_f0(page, 22050.0));
}
BENCHMARK(BM_Yin)->Arg(220)->Arg(523)->Arg(1976);

void BM_PeriodogramAmplitude(benchmark::State& state) {
  const auto page = tone_page(440.0);
  Periodogram p(page.size());
  for (auto _ : state) benchmark::DoNotOptimize(p.amplitude(page));
}
BENCHMARK(BM_PeriodogramAmplitude);

void BM_ResamplePressure(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> step(5.0, 15.0);
  PressureSeries s;
  for (double t = 0.0; t < 180000.0; t += step(rng)) s.samples.push_back({t, 101300.0 + std::sin(t * 1e-3)});
  const HopGrid grid;
  const auto hops = static_cast<std::size_t>(179.0 * grid.hop_rate());
  for (auto _ : state) benchmark::DoNotOptimize(resample_pressure(s, grid, hops));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(hops));
}
BENCHMARK(BM_ResamplePressure);

void BM_ExtractFeatures(benchmark::State& state) {
  auto script = default_script();
  script.notes.resize(1);
  script.notes[0].repetitions = 1;
  const auto files = generate_session(script, reference_model());
  const HopGrid grid;
  const auto audio = load_audio(files.wav, grid);
  const auto pressure = parse_pressure_log(files.pressure_csv);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(audio, pressure, grid));
  state.SetLabel(std::to_string(audio.samples.size() / 22050) + " s of audio");
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

void BM_SimulateTrace(benchmark::State& state) {
  const auto m = reference_model();
  std::vector<double> trace(10000);
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i] = 250.0 + 100.0 * std::sin(0.01 * i);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trace(m, 72, trace));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_SimulateTrace);

}  // namespace
BENCHMARK_MAIN();
