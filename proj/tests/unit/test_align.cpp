#include <doctest.h>

#include <random>

#include "flutekit/align.hpp"
#include "flutekit/error.hpp"
#include "flutekit/generator.hpp"
#include "flutekit/model.hpp"
#include "session.hpp"

using namespace flutekit;

namespace {

FeatureTable load_raw(const SessionFiles& files) {
  const HopGrid g;
  return extract_features(load_audio(files.wav, g), parse_pressure_log(files.pressure_csv), g);
}

}  // namespace

TEST_CASE("detect onsets") {
  SUBCASE("constructed spikes") {
    std::vector<double> v(50, 0.0);
    for (int k : {10, 15, 20, 25, 30}) v[k] = 1.0;
    CHECK(detect_onsets(v, 0.3).hops == std::vector<int>{10, 15, 20, 25, 30});
  }
  SUBCASE("constant and zero signals") {
    CHECK(detect_onsets(std::vector<double>(20, 2.0), 0.3).hops.empty());
    CHECK(detect_onsets(std::vector<double>(20, 0.0), 0.3).hops.empty());
  }
  SUBCASE("debounce") {
    std::vector<double> v(30, 0.0);
    v[5] = v[7] = v[12] = 1.0;
    CHECK(detect_onsets(v, 0.3, 3).hops == std::vector<int>{5, 12});
  }
}

TEST_CASE("estimate offset") {
  const OnsetList a{{10, 15, 20, 25, 30, 70, 75, 80, 85, 90}};
  SUBCASE("exact shift") {
    OnsetList p = a;
    for (auto& h : p.hops) h += 3;
    const auto r = estimate_offset(a, p, 400);
    CHECK(r.offset_hops == 3);
    CHECK(r.score == doctest::Approx(1.0));
    CHECK(r.matched == 10);
  }
  SUBCASE("identity") { CHECK(estimate_offset(a, a, 400).offset_hops == 0); }
  SUBCASE("no overlap within max lag") {
    OnsetList p = a;
    for (auto& h : p.hops) h += 300;
    CHECK_THROWS_WITH_AS(estimate_offset(a, p, 100), doctest::Contains("alignment failed"), Error);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(estimate_offset(a, OnsetList{}, 100), Error); }
  SUBCASE("jittered shifts") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> j(-0.4, 0.4);
    for (int lag = -200; lag <= 200; lag += 13) {
      OnsetList au, pr;
      for (int k = 0; k < 10; ++k) {
        const double t = 300.0 + (k < 5 ? 13.0 * k : 100.0 + 13.0 * k);
        au.hops.push_back(static_cast<int>(std::lround(t + j(rng))));
        pr.hops.push_back(static_cast<int>(std::lround(t + lag + j(rng))));
      }
      CHECK(estimate_offset(au, pr, 400).offset_hops == lag);
    }
  }
}

TEST_CASE("apply offset") {
  FeatureTable t;
  for (int k = 0; k < 40; ++k) {
    HopRecord r;
    r.index = k;
    r.pressure_pa = 100.0 + k;
    t.records.push_back(r);
  }
  CHECK(apply_offset(t, 0).pressures() == t.pressures());
  const auto shifted = apply_offset(t, 3);
  CHECK(*shifted.records[0].pressure_pa == 103.0);
  CHECK(*shifted.records[39].pressure_pa == 139.0);
  CHECK(shifted.meta.offset_hops == 3);
  const auto back = apply_offset(shifted, -3);
  for (int k = 3; k < 37; ++k) CHECK(*back.records[k].pressure_pa == 100.0 + k);
  CHECK(back.meta.offset_hops == 0);
  CHECK_THROWS_AS(apply_offset(t, 40), Error);
}

TEST_CASE("session alignment") {
  const auto model = reference_model();
  SUBCASE("injected lag in the default session") {
    const auto& a = testing::default_session().analysis.sidecar.alignment;
    CHECK(a.offset_hops == 7);
    CHECK(a.matched == 10);
    REQUIRE(a.drift_hops);
    CHECK(std::abs(*a.drift_hops) <= 1);
  }
  SUBCASE("preamble gives ten onsets in two groups") {
    const auto t = load_raw(generate_session(testing::short_script(), model));
    const auto on = detect_onsets(t.amplitudes(), 0.3);
    REQUIRE(on.hops.size() >= 10);
    const std::vector<int> first(on.hops.begin(), on.hops.begin() + 10);
    CHECK(first[5] - first[4] > 2 * (first[1] - first[0]));
  }
  SUBCASE("negative lag") {
    auto s = testing::short_script();
    s.lead_s = 6.0;
    s.lag_hops = -150;
    const auto t = load_raw(generate_session(s, model));
    CHECK(align_session(t).offset_hops == -150);
  }
  SUBCASE("injected drift") {
    auto s = testing::short_script();
    s.lag_hops = 4;
    s.drift_hops = 2.0;
    const auto t = load_raw(generate_session(s, model));
    const auto r = align_session(t);
    CHECK(r.offset_hops == 4);
    const auto d = check_drift(t, r);
    REQUIRE(d.drift_hops);
    CHECK(std::abs(*d.drift_hops - 2) <= 1);
  }
  SUBCASE("one note gives a warning and no drift") {
    auto s = testing::short_script();
    s.notes.resize(1);
    const auto t = load_raw(generate_session(s, model));
    const auto d = check_drift(t, align_session(t));
    CHECK_FALSE(d.drift_hops);
    CHECK_FALSE(d.warning.empty());
  }
}
