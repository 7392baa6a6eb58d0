#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "heartval/data.hpp"
#include "heartval/error.hpp"
#include "heartval/rng.hpp"
#include "heartval/signal.hpp"

using namespace heartval;
using namespace heartval::signal;

#define CHECK_ERRC(expr, errc)                    \
  do {                                            \
    bool threw_ = false;                          \
    try {                                         \
      (void)(expr);                               \
    } catch (const Error& e_) {                   \
      threw_ = true;                              \
      CHECK(e_.code() == (errc));                 \
    }                                             \
    CHECK_MESSAGE(threw_, "expected " #expr " to throw"); \
  } while (0)

TEST_CASE("moving_average window 1 is the identity") {
  Vec x(4);
  x << 3.0, -1.0, 0.5, 2.0;
  const Vec y = moving_average(x, 1);
  for (Index i = 0; i < 4; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("moving_average shrinks the window at the edges") {
  Vec x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  const Vec y = moving_average(x, 3);
  CHECK(y[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y[3] == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("moving_average keeps constants") {
  const Vec x = Vec::Constant(64, 0.7);
  const Vec y = moving_average(x, 9);
  for (Index i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("extract_ibi computes successive differences in seconds") {
  BeatSequence beats{{256, 512, 768}, 256.0};
  const auto ibi = extract_ibi(beats);
  REQUIRE(ibi.intervals_s.size() == 2);
  CHECK(ibi.intervals_s[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ibi.intervals_s[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extract_ibi mixed intervals") {
  BeatSequence beats{{0, 128, 384, 512}, 256.0};
  const auto ibi = extract_ibi(beats);
  REQUIRE(ibi.intervals_s.size() == 3);
  CHECK(ibi.intervals_s[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ibi.intervals_s[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ibi.intervals_s[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("extract_ibi cleaning can leave too little") {
  // 25/256 s is below the plausibility band, so only one interval survives.
  BeatSequence beats{{0, 25, 281}, 256.0};
  CHECK_ERRC(extract_ibi(beats), Errc::empty_after_cleaning);
}

TEST_CASE("extract_ibi needs three peaks") {
  BeatSequence beats{{0, 256}, 256.0};
  CHECK_ERRC(extract_ibi(beats), Errc::too_few_beats);
}

TEST_CASE("zscore matches the population formula") {
  const auto z = zscore({1.0, 2.0, 3.0});
  REQUIRE(z.size() == 3);
  CHECK(z[0] == doctest::Approx(-1.224744871391589).epsilon(1e-6));
  CHECK(z[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(z[2] == doctest::Approx(1.224744871391589).epsilon(1e-6));
}

TEST_CASE("zscore maps constant input to zeros") {
  const auto z = zscore({0.8, 0.8, 0.8});
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("zscore output has zero mean and unit population sd") {
  Rng rng(101);
  std::vector<double> x(257);
  for (auto& v : x) v = rng.normal(0.8, 0.2);
  const auto z = zscore(x);
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= static_cast<double>(z.size());
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
}

TEST_CASE("zscore is invariant under positive affine transforms") {
  Rng rng(11);
  std::vector<double> x(50), y(50);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal(0.9, 0.1);
    y[i] = 2.5 * x[i] + 0.3;
  }
  const auto zx = zscore(x);
  const auto zy = zscore(y);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(zx[i] - zy[i]) < 1e-9);
}

TEST_CASE("zscore rejects short input") {
  CHECK_ERRC(zscore({1.0}), Errc::too_short);
}

TEST_CASE("zero_pad appends zeros at the end") {
  const auto p = zero_pad({1.0, -1.0}, 4);
  CHECK(p.valid_length == 2);
  CHECK(p.padded_length == 4);
  REQUIRE(p.values.size() == 4);
  CHECK(p.values[0] == 1.0);
  CHECK(p.values[1] == -1.0);
  CHECK(p.values[2] == 0.0);
  CHECK(p.values[3] == 0.0);
}

TEST_CASE("zero_pad exact length is the identity") {
  const auto p = zero_pad({1.0, -1.0}, 2);
  CHECK(p.valid_length == 2);
  CHECK(p.padded_length == 2);
  CHECK(p.values[0] == 1.0);
  CHECK(p.values[1] == -1.0);
}

TEST_CASE("zero_pad rejects too-small targets") {
  CHECK_ERRC(zero_pad({0.5}, 0), Errc::target_too_small);
}

namespace {

std::vector<double> regular_beats(int count, double start_s, double period_s) {
  std::vector<double> out(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<size_t>(k)] = start_s + period_s * k;
  return out;
}

struct MatchRates {
  double sensitivity = 0.0;
  double ppv = 0.0;
};

// Greedy in-order matching of detections to ground truth within a tolerance.
MatchRates match_peaks(const std::vector<Index>& truth, const std::vector<Index>& found,
                       Index tol) {
  size_t ti = 0;
  long hits = 0;
  for (Index f : found) {
    while (ti < truth.size() && truth[ti] < f - tol) ++ti;
    if (ti < truth.size() && std::abs(static_cast<long>(truth[ti] - f)) <= tol) {
      ++hits;
      ++ti;
    }
  }
  MatchRates r;
  r.sensitivity = truth.empty() ? 1.0 : static_cast<double>(hits) / truth.size();
  r.ppv = found.empty() ? 1.0 : static_cast<double>(hits) / found.size();
  return r;
}

}  // namespace

TEST_CASE("detect_r_peaks recovers every clean synthetic beat") {
  const auto beat_times = regular_beats(75, 0.4, 0.8);
  const auto [ecg, truth] = data::synth_ecg(beat_times, 60.0, 256.0, 0.0, 1);
  const auto beats = detect_r_peaks(ecg);
  REQUIRE(beats.r_peak_indices.size() == truth.r_peak_indices.size());
  for (size_t i = 0; i < truth.r_peak_indices.size(); ++i)
    CHECK(std::abs(static_cast<long>(beats.r_peak_indices[i] - truth.r_peak_indices[i])) <= 10);
}

TEST_CASE("detect_r_peaks on a flat signal finds nothing") {
  EcgRecord ecg;
  ecg.sample_rate_hz = 256.0;
  ecg.samples = Vec::Zero(60 * 256);
  const auto beats = detect_r_peaks(ecg);
  CHECK(beats.r_peak_indices.empty());
}

TEST_CASE("detect_r_peaks needs two seconds of signal") {
  EcgRecord ecg;
  ecg.sample_rate_hz = 256.0;
  ecg.samples = Vec::Zero(256);
  CHECK_ERRC(detect_r_peaks(ecg), Errc::signal_too_short);
}

TEST_CASE("detect_r_peaks respects the refractory spacing") {
  const auto beat_times = regular_beats(75, 0.4, 0.8);
  const auto [ecg, truth] = data::synth_ecg(beat_times, 60.0, 256.0, 0.05, 3);
  const auto beats = detect_r_peaks(ecg);
  const Index refractory = static_cast<Index>(std::lround(0.2 * 256.0));
  for (size_t i = 1; i < beats.r_peak_indices.size(); ++i)
    CHECK(beats.r_peak_indices[i] - beats.r_peak_indices[i - 1] >= refractory);
}

TEST_CASE("detect_r_peaks stays accurate under noise") {
  const auto beat_times = regular_beats(75, 0.4, 0.8);
  const Index tol = static_cast<Index>(std::lround(0.04 * 256.0));
  for (uint64_t seed : {11u, 12u, 13u}) {
    const auto [ecg, truth] = data::synth_ecg(beat_times, 60.0, 256.0, 0.05, seed);
    const auto beats = detect_r_peaks(ecg);
    const auto rates = match_peaks(truth.r_peak_indices, beats.r_peak_indices, tol);
    CHECK(rates.sensitivity >= 0.99);
    CHECK(rates.ppv >= 0.99);
  }
}

TEST_CASE("preprocess_trial runs the full pipeline") {
  const auto beat_times = regular_beats(75, 0.4, 0.8);
  auto [ecg, truth] = data::synth_ecg(beat_times, 60.0, 256.0, 0.0, 5);
  const auto prepared = preprocess_trial(ecg, 100);
  CHECK(prepared.valid_length == 74);
  CHECK(prepared.padded_length == 100);
  double mean = 0.0;
  for (Index i = 0; i < prepared.valid_length; ++i) mean += prepared.values[i];
  mean /= static_cast<double>(prepared.valid_length);
  CHECK(std::abs(mean) < 1e-9);
  for (Index i = prepared.valid_length; i < prepared.padded_length; ++i)
    CHECK(prepared.values[i] == 0.0);
}

TEST_CASE("preprocess_trial names the failing stage") {
  EcgRecord ecg;
  ecg.sample_rate_hz = 256.0;
  ecg.samples = Vec::Zero(60 * 256);  // flat: no beats at all
  bool threw = false;
  try {
    preprocess_trial(ecg, 100);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::too_few_beats);
    CHECK(std::string(e.what()).find("stage extract_ibi") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("preprocess_trial is invariant under a constant rate shift") {
  // Same interval shape on the sample grid, baselines 179/256 s vs 256/256 s.
  std::vector<double> deltas = {0, 3, -2, 5, 1, -4, 2, 0, -1, 3, -3, 4, -2, 1, 0, 2};
  auto make_record = [&](double base_samples) {
    std::vector<double> times;
    double t = 0.5;
    times.push_back(t);
    for (double d : deltas) {
      t += (base_samples + d) / 256.0;
      times.push_back(t);
    }
    auto [ecg, truth] = data::synth_ecg(times, t + 1.0, 256.0, 0.0, 9);
    return ecg;
  };
  const auto a = preprocess_trial(make_record(179.0), 40);
  const auto b = preprocess_trial(make_record(179.0 + 77.0), 40);
  REQUIRE(a.valid_length == b.valid_length);
  for (Index i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-9);
}
