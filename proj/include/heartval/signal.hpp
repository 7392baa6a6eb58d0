#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heartval/types.hpp"

namespace heartval::signal {

// Raw ECG sample stream for one subject/trial at a fixed sample rate.
struct EcgRecord {
  std::string subject_id;
  std::string trial_id;
  double sample_rate_hz = 256.0;
  Vec samples;  // millivolts
};

// Detected R-peak positions, as sample indices into the source record.
struct BeatSequence {
  std::vector<Index> r_peak_indices;  // strictly increasing
  double sample_rate_hz = 256.0;
};

// Inter-beat intervals in seconds, after artifact cleaning.
struct IbiSeries {
  std::string subject_id;
  std::string trial_id;
  std::vector<double> intervals_s;
};

// Z-scored IBI sequence padded with trailing zeros to a fixed length.
struct PreparedSeries {
  Vec values;            // length == padded_length
  Index valid_length = 0;  // entries before the zero tail
  Index padded_length = 0;
};

// Knobs of the R-peak detector. Defaults are the production values; every
// parameter is configurable so the detector can be tuned per corpus.
struct DetectorConfig {
  double baseline_window_s = 0.6;   // moving average subtracted as baseline
  double smooth_window_s = 0.04;    // smoothing of the baseline-removed lead
  double complex_smooth_s = 0.04;   // smoothing of the rectified derivative
  double threshold_fraction = 0.6;  // threshold as a fraction of peak height
  double init_window_s = 5.0;       // span used to seed the threshold
  double decay_per_sample = 0.999;  // multiplicative threshold decay
  double refractory_s = 0.2;        // lock-out between detections
  double refine_window_s = 0.03;    // snap-to-peak search half-width
};

// Physiological plausibility band for a single IBI, seconds (open interval).
inline constexpr double kMinIbiS = 0.2;
inline constexpr double kMaxIbiS = 3.0;

// Centered moving average with shrinking windows at the edges.
Vec moving_average(const Vec& x, Index window);

// Adaptive-threshold QRS detector. Returns all R-peak sample indices, spaced
// at least one refractory period apart; empty when nothing crosses threshold.
// Throws SignalTooShort below 2 s of signal.
BeatSequence detect_r_peaks(const EcgRecord& ecg, const DetectorConfig& cfg = {});

// Successive peak differences in seconds with intervals outside
// (kMinIbiS, kMaxIbiS) removed. Throws TooFewBeats / EmptyAfterCleaning.
IbiSeries extract_ibi(const BeatSequence& beats, const std::string& subject_id = "",
                      const std::string& trial_id = "");

// (x - mean) / population sd; all zeros when the sd is zero. Throws TooShort
// below two entries.
std::vector<double> zscore(const std::vector<double>& x);

// Appends zeros up to target_length. Throws TargetTooSmall.
PreparedSeries zero_pad(const std::vector<double>& values, Index target_length);

// detect_r_peaks -> extract_ibi -> zscore -> zero_pad. Stage errors propagate
// with the failing stage named in the message.
PreparedSeries preprocess_trial(const EcgRecord& ecg, Index target_length,
                                const DetectorConfig& cfg = {});

}  // namespace heartval::signal
