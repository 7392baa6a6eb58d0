#include "heartval/signal.hpp"

#include <algorithm>
#include <cmath>

#include "heartval/error.hpp"

namespace heartval::signal {

namespace {

Index window_samples(double seconds, double fs) {
  return std::max<Index>(1, static_cast<Index>(std::lround(seconds * fs)));
}

}  // namespace

Vec moving_average(const Vec& x, Index window) {
  const Index n = x.size();
  Vec out(n);
  if (n == 0) return out;
  if (window < 1) window = 1;
  const Index half_left = (window - 1) / 2;
  const Index half_right = window - 1 - half_left;
  // Prefix sums keep this O(n) for the long baseline window.
  std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
  for (Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - half_left);
    const Index hi = std::min<Index>(n - 1, i + half_right);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

BeatSequence detect_r_peaks(const EcgRecord& ecg, const DetectorConfig& cfg) {
  const double fs = ecg.sample_rate_hz;
  if (fs <= 0.0) throw Error(Errc::invalid_config, "sample rate must be positive");
  const Index n = ecg.samples.size();
  if (static_cast<double>(n) < 2.0 * fs)
    throw Error(Errc::signal_too_short, "need at least 2 s of signal, got " +
                                            std::to_string(static_cast<double>(n) / fs) + " s");

  // Baseline removal and smoothing.
  const Vec baseline = moving_average(ecg.samples, window_samples(cfg.baseline_window_s, fs));
  const Vec detrended = ecg.samples - baseline;
  const Vec smooth = moving_average(detrended, window_samples(cfg.smooth_window_s, fs));

  // Complex lead: rectified first difference, smoothed again.
  Vec deriv = Vec::Zero(n);
  for (Index i = 1; i < n; ++i) deriv[i] = std::abs(smooth[i] - smooth[i - 1]);
  const Vec complex_lead = moving_average(deriv, window_samples(cfg.complex_smooth_s, fs));

  // Threshold seeded from the opening stretch, then decayed sample by sample
  // and re-armed at each detection.
  const Index init_span = std::min<Index>(n, window_samples(cfg.init_window_s, fs));
  double threshold = cfg.threshold_fraction * complex_lead.head(init_span).maxCoeff();

  const Index refractory = window_samples(cfg.refractory_s, fs);
  const Index refine = window_samples(cfg.refine_window_s, fs);

  std::vector<Index> peaks;
  Index last_fire = -refractory;  // complex-lead index of the previous detection
  for (Index i = 1; i + 1 < n; ++i) {
    threshold *= cfg.decay_per_sample;
    const bool local_max =
        complex_lead[i] >= complex_lead[i - 1] && complex_lead[i] > complex_lead[i + 1];
    if (!local_max || complex_lead[i] <= threshold || i - last_fire < refractory) continue;
    last_fire = i;
    threshold = cfg.threshold_fraction * complex_lead[i];

    // Snap to the strongest deflection of the smoothed lead near the firing
    // point; the complex lead lags the R wave by the differencing filters.
    Index best = std::max<Index>(0, i - refine);
    const Index hi = std::min<Index>(n - 1, i + refine);
    for (Index j = best + 1; j <= hi; ++j)
      if (std::abs(smooth[j]) > std::abs(smooth[best])) best = j;
    if (!peaks.empty() && best - peaks.back() < refractory) continue;
    peaks.push_back(best);
  }

  return BeatSequence{std::move(peaks), fs};
}

IbiSeries extract_ibi(const BeatSequence& beats, const std::string& subject_id,
                      const std::string& trial_id) {
  const size_t n_peaks = beats.r_peak_indices.size();
  if (n_peaks < 3)
    throw Error(Errc::too_few_beats, "need at least 3 peaks, got " + std::to_string(n_peaks));

  std::vector<double> intervals;
  intervals.reserve(n_peaks - 1);
  for (size_t i = 0; i + 1 < n_peaks; ++i) {
    const double dt = static_cast<double>(beats.r_peak_indices[i + 1] - beats.r_peak_indices[i]) /
                      beats.sample_rate_hz;
    if (dt > kMinIbiS && dt < kMaxIbiS) intervals.push_back(dt);
  }
  if (intervals.size() < 2)
    throw Error(Errc::empty_after_cleaning,
                "only " + std::to_string(intervals.size()) + " intervals survive cleaning");
  return IbiSeries{subject_id, trial_id, std::move(intervals)};
}

std::vector<double> zscore(const std::vector<double>& x) {
  const size_t n = x.size();
  if (n < 2) throw Error(Errc::too_short, "z-score needs at least 2 values");
  bool constant = true;
  for (double v : x)
    if (v != x[0]) {
      constant = false;
      break;
    }
  if (constant) return std::vector<double>(n, 0.0);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);

  std::vector<double> out(n, 0.0);
  if (sd > 0.0)
    for (size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

PreparedSeries zero_pad(const std::vector<double>& values, Index target_length) {
  const Index n = static_cast<Index>(values.size());
  if (target_length < n)
    throw Error(Errc::target_too_small, "target " + std::to_string(target_length) +
                                            " < input length " + std::to_string(n));
  PreparedSeries out;
  out.values = Vec::Zero(target_length);
  for (Index i = 0; i < n; ++i) out.values[i] = values[static_cast<size_t>(i)];
  out.valid_length = n;
  out.padded_length = target_length;
  return out;
}

PreparedSeries preprocess_trial(const EcgRecord& ecg, Index target_length,
                                const DetectorConfig& cfg) {
  auto staged = [](const char* stage, const Error& e) -> Error {
    return Error(e.code(), std::string("stage ") + stage + ": " + e.what());
  };
  BeatSequence beats;
  try {
    beats = detect_r_peaks(ecg, cfg);
  } catch (const Error& e) {
    throw staged("detect_r_peaks", e);
  }
  IbiSeries ibi;
  try {
    ibi = extract_ibi(beats, ecg.subject_id, ecg.trial_id);
  } catch (const Error& e) {
    throw staged("extract_ibi", e);
  }
  std::vector<double> normalized;
  try {
    normalized = zscore(ibi.intervals_s);
  } catch (const Error& e) {
    throw staged("zscore", e);
  }
  try {
    return zero_pad(normalized, target_length);
  } catch (const Error& e) {
    throw staged("zero_pad", e);
  }
}

}  // namespace heartval::signal
