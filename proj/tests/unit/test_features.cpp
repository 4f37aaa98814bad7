#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flutekit/error.hpp"
#include "flutekit/features.hpp"
#include "flutekit/model.hpp"
#include "session.hpp"

using namespace flutekit;

namespace {

std::vector<double> tone(double f, std::size_t n = 2048, double rate = 22050.0,
                         bool odd_harmonics = false) {
  std::vector<double> v(n);
  const double h = std::pow(10.0, -12.0 / 20.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 2 * std::numbers::pi * f * i / rate;
    v[i] = std::sin(w);
    if (odd_harmonics) v[i] += h * std::sin(3 * w) + h * std::sin(5 * w);
  }
  return v;
}

double cents(double f, double ref) { return 1200.0 * std::log2(f / ref); }

}  // namespace

TEST_CASE("yin on tones") {
  SUBCASE("440 Hz sine") {
    const auto f0 = yin_f0(tone(440.0), 22050.0);
    REQUIRE(f0);
    CHECK(std::abs(*f0 - 440.0) < 1.0);
  }
  SUBCASE("440 Hz with odd harmonics at -12 dB") {
    const auto f0 = yin_f0(tone(440.0, 2048, 22050.0, true), 22050.0);
    REQUIRE(f0);
    CHECK(std::abs(*f0 - 440.0) < 1.0);
  }
  SUBCASE("zero page is unvoiced") {
    CHECK_FALSE(yin_f0(std::vector<double>(2048, 0.0), 22050.0));
  }
  SUBCASE("white noise is unvoiced") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    std::vector<double> v(2048);
    for (auto& x : v) x = n(rng);
    CHECK_FALSE(yin_f0(v, 22050.0));
  }
  SUBCASE("out of range fundamental is unvoiced") {
    CHECK_FALSE(yin_f0(tone(150.0), 22050.0));
  }
  SUBCASE("pure tones across the range stay within 10 cents") {
    for (double f = 220.0; f <= 3000.0; f *= 1.07) {
      const auto f0 = yin_f0(tone(f), 22050.0);
      REQUIRE_MESSAGE(f0, "f = " << f);
      CHECK_MESSAGE(std::abs(cents(*f0, f)) < 10.0, "f = " << f);
    }
  }
}

TEST_CASE("page amplitude") {
  CHECK(page_amplitude(std::vector<double>(2048, 0.0)) == 0.0);
  // 440 Hz does not land on a bin; use a whole number of cycles.
  const double f = 22050.0 * 40 / 2048;
  CHECK(page_amplitude(tone(f)) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(page_amplitude(tone(440.0)) ==
        doctest::Approx([] {
          double s = 0;
          for (double x : tone(440.0)) s += x * x;
          return s / 2048;
        }())
            .epsilon(1e-9));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> page(2048);
    double ms = 0.0;
    for (auto& x : page) {
      x = u(rng);
      ms += x * x;
    }
    ms /= 2048.0;
    CHECK(std::abs(page_amplitude(page) - ms) <= 1e-9 * ms);
  }
}

TEST_CASE("periodogram odd length") {
  Periodogram p(1001);
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.3 * i) + 0.1;
  double ms = 0;
  for (double x : v) ms += x * x;
  ms /= 1001.0;
  CHECK(p.amplitude(v) == doctest::Approx(ms).epsilon(1e-12));
}

TEST_CASE("hz_to_midi") {
  CHECK(hz_to_midi(440.0) == doctest::Approx(69.0).epsilon(1e-15));
  CHECK(hz_to_midi(880.0) == doctest::Approx(81.0).epsilon(1e-15));
  CHECK(std::abs(hz_to_midi(261.6256) - 60.0) < 1e-3);
  CHECK_THROWS_AS(hz_to_midi(0.0), Error);
  CHECK_THROWS_AS(hz_to_midi(-3.0), Error);
  for (double m = 30.0; m < 110.0; m += 0.37) CHECK(std::abs(hz_to_midi(midi_to_hz(m)) - m) < 1e-9);
}

TEST_CASE("extract features") {
  const HopGrid g;
  SUBCASE("record count on 10 s") {
    AudioBuffer a{std::vector<double>(220500, 0.0), 22050.0};
    PressureSeries p{{{0.0, 101325.0}, {10000.0, 101325.0}}};
    const auto t = extract_features(a, p, g);
    CHECK(t.size() == 427);
    for (const auto& r : t.records) {
      CHECK_FALSE(r.voiced);
      CHECK(r.amplitude == 0.0);
      REQUIRE(r.pressure_pa);
      CHECK(*r.pressure_pa == 101325.0);
    }
    CHECK(t.records[10].time_s == doctest::Approx(10 * 512.0 / 22050.0));
  }
  SUBCASE("short audio is an input error") {
    AudioBuffer a{std::vector<double>(1000, 0.0), 22050.0};
    PressureSeries p{{{0.0, 1.0}, {1.0, 1.0}}};
    CHECK_THROWS_AS(extract_features(a, p, g), Error);
  }
}

TEST_CASE("generator session pitch tracks the scripted pitch") {
  const auto& s = testing::default_session();
  const auto& t = s.analysis.table;
  const auto model = reference_model();
  // Oracle: the model evaluated at the hop's gauge pressure and register.
  int voiced = 0, close = 0;
  for (const auto& seg : s.analysis.sidecar.segments) {
    for (int k = seg.start; k < seg.end; ++k) {
      const auto& r = t.records[static_cast<std::size_t>(k)];
      if (!r.retained() || !r.pressure_pa || *r.pressure_pa <= 0.0) continue;
      const double sounding = seg.base_pitch_midi + (*r.pitch_midi > seg.base_pitch_midi + 6 ? 12 : 0);
      const auto b = bend_at(model, sounding, *r.pressure_pa);
      if (!b.valid) continue;
      ++voiced;
      const double expect_hz = midi_to_hz(sounding) * b.q;
      if (std::abs(cents(*r.f0_hz, expect_hz)) < 10.0) ++close;
    }
  }
  REQUIRE(voiced > 1000);
  CHECK(static_cast<double>(close) / voiced >= 0.95);
}

TEST_CASE("features csv round trip") {
  const auto& t = testing::default_session().analysis.table;
  const auto text = serialize_features_csv(t);
  CHECK(text.rfind("index,time_s,pressure_pa,f0_hz,pitch_midi,amplitude,voiced,discard\n", 0) == 0);
  const auto back = parse_features_csv(text, t.grid);
  REQUIRE(back.size() == t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& a = t.records[k];
    const auto& b = back.records[k];
    CHECK(a.index == b.index);
    CHECK(a.time_s == b.time_s);
    CHECK(a.pressure_pa == b.pressure_pa);
    CHECK(a.f0_hz == b.f0_hz);
    CHECK(a.pitch_midi == b.pitch_midi);
    CHECK(a.amplitude == b.amplitude);
    CHECK(a.voiced == b.voiced);
    CHECK(a.discard == b.discard);
  }
  CHECK(serialize_features_csv(back) == text);
  CHECK_THROWS_AS(parse_features_csv("index,time\n", t.grid), Error);
}
