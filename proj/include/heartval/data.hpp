#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "heartval/signal.hpp"

namespace heartval::data {

struct TrialSample {
  std::string subject_id;
  std::string trial_id;
  signal::PreparedSeries prepared;
  double valence_raw = 0.0;
  double scale_min = 1.0;
  double scale_max = 9.0;
};

// All samples share prepared.padded_length == pad_length.
struct Dataset {
  std::vector<TrialSample> samples;
  Index pad_length = 0;
  std::string name;
};

struct SkippedTrial {
  std::string subject_id;
  std::string trial_id;
  std::string reason;
};

struct LoadReport {
  Dataset dataset;
  std::vector<SkippedTrial> skipped;
};

// One manifest.csv row.
struct ManifestRecord {
  std::string subject_id;
  std::string trial_id;
  double sample_rate_hz = 0.0;
  double valence_raw = 0.0;
  double scale_min = 0.0;
  double scale_max = 0.0;
};

// `<root>/manifest.csv`, header and every row validated; a header-only file
// yields zero records. Throws MissingManifest (absent file), MalformedRow
// with the line number.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& root);
std::string manifest_csv(const std::vector<ManifestRecord>& records);

// Trial file locations under a corpus root.
std::filesystem::path ecg_path(const std::filesystem::path& root, const std::string& subject_id,
                               const std::string& trial_id);
std::filesystem::path ibi_path(const std::filesystem::path& root, const std::string& subject_id,
                               const std::string& trial_id);

// Single-column `ibi_s` interval files. Throws MalformedRow.
std::vector<double> read_ibi_csv(const std::filesystem::path& path);
std::string ibi_csv(const std::vector<double>& ibis_s);

// `t_s,ecg_mv` waveform files; reading uses only the voltage column.
// Throws MalformedRow.
Vec read_ecg_samples(const std::filesystem::path& path);
std::string ecg_csv(const Vec& samples, double sample_rate_hz);

// Reads the manifest and each trial's `<subject>/<trial>.csv` ECG (or
// `<subject>/<trial>.ibi.csv` when use_precomputed_ibi), runs the signal
// pipeline, and pads every series to the longest surviving IBI count. Trials
// that fail preprocessing are listed in `skipped` rather than aborting the
// load. Throws MissingManifest, MalformedRow, AllTrialsSkipped.
LoadReport load_dataset(const std::filesystem::path& root, bool use_precomputed_ibi,
                        const signal::DetectorConfig& detector = {});

// AR(1) interval dynamics for one class.
struct ClassParams {
  double mean_s = 0.8;
  double sd_s = 0.1;
  double rho = 0.0;  // lag-1 autocorrelation
};

struct SyntheticSpec {
  int n_subjects = 20;
  int trials_per_subject = 8;
  double balance = 0.5;  // probability a trial is high-valence
  ClassParams low{0.8, 0.12, 0.6};
  ClassParams high{0.8, 0.03, 0.1};
  int min_beats = 60;
  int max_beats = 100;
  double scale_min = 1.0;
  double scale_max = 9.0;
  double subject_offset_sd_s = 0.05;  // per-subject baseline shift
  uint64_t seed = 42;

  // Corpus emission extras.
  bool emit_ecg = false;
  double sample_rate_hz = 256.0;
  double noise_sd_mv = 0.0;
};

// Throws InvalidSpec.
void validate(const SyntheticSpec& spec);

struct SynthTrial {
  std::string subject_id;
  std::string trial_id;
  std::vector<double> ibis_s;
  double valence_raw = 0.0;
  bool is_high = false;
};

// Raw per-trial interval sequences, before normalization. Reproducible from
// spec.seed; each trial depends only on its own (subject, trial) indices.
std::vector<SynthTrial> synth_trials(const SyntheticSpec& spec);

// synth_trials composed with the z-score/pad pipeline into a ready Dataset.
Dataset synth_ibi_dataset(const SyntheticSpec& spec);

// Gaussian QRS templates (amplitude 1 mV, width 0.02 s) at the given beat
// times plus white noise. Returns the waveform and the ground-truth peak
// indices. Throws InvalidBeatTimes.
std::pair<signal::EcgRecord, signal::BeatSequence> synth_ecg(
    const std::vector<double>& beat_times_s, double duration_s, double sample_rate_hz,
    double noise_sd_mv, uint64_t seed);

// Writes a loadable corpus under root: manifest.csv, one `.ibi.csv` per
// trial, and (when spec.emit_ecg) a synthesized ECG `.csv` per trial.
void write_corpus(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace heartval::data
