#include "heartval/data.hpp"

#include <algorithm>
#include <cmath>

#include "heartval/error.hpp"
#include "heartval/io_util.hpp"
#include "heartval/rng.hpp"

namespace heartval::data {

namespace {

constexpr const char* kManifestHeader =
    "subject_id,trial_id,sample_rate_hz,valence_raw,scale_min,scale_max";

// Drops implausible intervals, mirroring the extract_ibi cleaning band.
std::vector<double> clean_intervals(const std::vector<double>& raw) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw)
    if (v > signal::kMinIbiS && v < signal::kMaxIbiS) out.push_back(v);
  return out;
}

std::string pad_id(const char* prefix, int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& root) {
  const auto path = root / "manifest.csv";
  if (!std::filesystem::exists(path))
    throw Error(Errc::missing_manifest, path.string());
  const std::string text = read_text_file(path);
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != kManifestHeader)
    throw Error(Errc::malformed_row, "line 1: manifest header must be '" +
                                         std::string(kManifestHeader) + "'");
  std::vector<ManifestRecord> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    if (fields.size() != 6)
      throw Error(Errc::malformed_row, where + "expected 6 fields, got " +
                                           std::to_string(fields.size()));
    ManifestRecord row;
    row.subject_id = std::string(trim(fields[0]));
    row.trial_id = std::string(trim(fields[1]));
    if (row.subject_id.empty() || row.trial_id.empty())
      throw Error(Errc::malformed_row, where + "empty subject or trial id");
    try {
      row.sample_rate_hz = parse_double(fields[2]);
      row.valence_raw = parse_double(fields[3]);
      row.scale_min = parse_double(fields[4]);
      row.scale_max = parse_double(fields[5]);
    } catch (const Error& e) {
      throw Error(Errc::malformed_row, where + e.what());
    }
    if (row.sample_rate_hz <= 0.0)
      throw Error(Errc::malformed_row, where + "sample_rate_hz must be positive");
    if (!(row.scale_min < row.scale_max))
      throw Error(Errc::malformed_row, where + "scale_min must be < scale_max");
    if (row.valence_raw < row.scale_min || row.valence_raw > row.scale_max)
      throw Error(Errc::malformed_row,
                  where + "valence_raw " + fmt_double(row.valence_raw) + " outside scale");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string manifest_csv(const std::vector<ManifestRecord>& records) {
  std::string out = kManifestHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.subject_id;
    out += ',';
    out += r.trial_id;
    out += ',';
    out += fmt_double(r.sample_rate_hz);
    out += ',';
    out += fmt_double(r.valence_raw);
    out += ',';
    out += fmt_double(r.scale_min);
    out += ',';
    out += fmt_double(r.scale_max);
    out += '\n';
  }
  return out;
}

std::filesystem::path ecg_path(const std::filesystem::path& root, const std::string& subject_id,
                               const std::string& trial_id) {
  return root / subject_id / (trial_id + ".csv");
}

std::filesystem::path ibi_path(const std::filesystem::path& root, const std::string& subject_id,
                               const std::string& trial_id) {
  return root / subject_id / (trial_id + ".ibi.csv");
}

std::vector<double> read_ibi_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "ibi_s")
    throw Error(Errc::malformed_row, path.string() + ": header must be 'ibi_s'");
  std::vector<double> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    out.push_back(parse_double(line));
  }
  return out;
}

std::string ibi_csv(const std::vector<double>& ibis_s) {
  std::string out = "ibi_s\n";
  for (double v : ibis_s) {
    out += fmt_double(v);
    out += '\n';
  }
  return out;
}

Vec read_ecg_samples(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "t_s,ecg_mv")
    throw Error(Errc::malformed_row, path.string() + ": header must be 't_s,ecg_mv'");
  std::vector<double> mv;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2)
      throw Error(Errc::malformed_row, path.string() + ": line " + std::to_string(i + 1));
    mv.push_back(parse_double(fields[1]));
  }
  Vec samples(static_cast<Index>(mv.size()));
  for (size_t k = 0; k < mv.size(); ++k) samples[static_cast<Index>(k)] = mv[k];
  return samples;
}

std::string ecg_csv(const Vec& samples, double sample_rate_hz) {
  std::string out = "t_s,ecg_mv\n";
  for (Index k = 0; k < samples.size(); ++k) {
    out += fmt_double(static_cast<double>(k) / sample_rate_hz);
    out += ',';
    out += fmt_double(samples[k]);
    out += '\n';
  }
  return out;
}

LoadReport load_dataset(const std::filesystem::path& root, bool use_precomputed_ibi,
                        const signal::DetectorConfig& detector) {
  const auto rows = read_manifest(root);

  LoadReport report;
  struct Pending {
    ManifestRecord row;
    std::vector<double> ibis;
  };
  std::vector<Pending> pending;
  for (const auto& row : rows) {
    try {
      std::vector<double> ibis;
      if (use_precomputed_ibi) {
        ibis = clean_intervals(read_ibi_csv(ibi_path(root, row.subject_id, row.trial_id)));
        if (ibis.size() < 2)
          throw Error(Errc::empty_after_cleaning, "fewer than 2 plausible intervals");
      } else {
        signal::EcgRecord ecg;
        ecg.subject_id = row.subject_id;
        ecg.trial_id = row.trial_id;
        ecg.sample_rate_hz = row.sample_rate_hz;
        ecg.samples = read_ecg_samples(ecg_path(root, row.subject_id, row.trial_id));
        const auto beats = signal::detect_r_peaks(ecg, detector);
        ibis = signal::extract_ibi(beats, row.subject_id, row.trial_id).intervals_s;
      }
      pending.push_back({row, std::move(ibis)});
    } catch (const Error& e) {
      report.skipped.push_back({row.subject_id, row.trial_id, e.what()});
    }
  }
  if (pending.empty())
    throw Error(Errc::all_trials_skipped, "no trial in " + root.string() + " survived loading");

  Index pad = 0;
  for (const auto& p : pending)
    pad = std::max(pad, static_cast<Index>(p.ibis.size()));

  report.dataset.name = root.filename().string();
  report.dataset.pad_length = pad;
  for (auto& p : pending) {
    TrialSample sample;
    sample.subject_id = p.row.subject_id;
    sample.trial_id = p.row.trial_id;
    sample.valence_raw = p.row.valence_raw;
    sample.scale_min = p.row.scale_min;
    sample.scale_max = p.row.scale_max;
    sample.prepared = signal::zero_pad(signal::zscore(p.ibis), pad);
    report.dataset.samples.push_back(std::move(sample));
  }
  return report;
}

void validate(const SyntheticSpec& s) {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_spec, msg); };
  if (s.n_subjects < 1) fail("n_subjects must be >= 1");
  if (s.trials_per_subject < 1) fail("trials_per_subject must be >= 1");
  if (s.balance < 0.0 || s.balance > 1.0) fail("balance must be in [0, 1]");
  for (const auto* cp : {&s.low, &s.high}) {
    if (cp->mean_s <= signal::kMinIbiS || cp->mean_s >= signal::kMaxIbiS)
      fail("class mean must lie inside the plausibility band");
    if (cp->sd_s < 0.0) fail("class sd must be >= 0");
    if (cp->rho <= -1.0 || cp->rho >= 1.0) fail("class autocorrelation must be in (-1, 1)");
  }
  if (s.min_beats < 2) fail("min_beats must be >= 2");
  if (s.max_beats < s.min_beats) fail("max_beats must be >= min_beats");
  if (!(s.scale_min < s.scale_max)) fail("scale_min must be < scale_max");
  if (s.subject_offset_sd_s < 0.0) fail("subject_offset_sd_s must be >= 0");
  if (s.sample_rate_hz <= 0.0) fail("sample_rate_hz must be positive");
  if (s.noise_sd_mv < 0.0) fail("noise_sd_mv must be >= 0");
}

std::vector<SynthTrial> synth_trials(const SyntheticSpec& spec) {
  validate(spec);
  const int id_width = std::max(2, static_cast<int>(std::to_string(spec.n_subjects).size()));
  const int trial_width =
      std::max(2, static_cast<int>(std::to_string(spec.trials_per_subject).size()));
  // Interval values stay strictly inside the plausibility band so cleaning
  // never removes synthetic beats.
  const double lo = signal::kMinIbiS + 1e-3;
  const double hi = signal::kMaxIbiS - 1e-3;

  std::vector<SynthTrial> out;
  out.reserve(static_cast<size_t>(spec.n_subjects) * spec.trials_per_subject);
  for (int s = 0; s < spec.n_subjects; ++s) {
    Rng subject_rng(derive_seed(spec.seed, "subject", static_cast<uint64_t>(s)));
    const double offset = subject_rng.normal(0.0, spec.subject_offset_sd_s);
    for (int t = 0; t < spec.trials_per_subject; ++t) {
      const uint64_t trial_index =
          static_cast<uint64_t>(s) * static_cast<uint64_t>(spec.trials_per_subject) +
          static_cast<uint64_t>(t);
      Rng rng(derive_seed(spec.seed, "trial", trial_index));

      SynthTrial trial;
      trial.subject_id = pad_id("S", s + 1, id_width);
      trial.trial_id = pad_id("T", t + 1, trial_width);
      trial.is_high = rng.bernoulli(spec.balance);
      const ClassParams& cp = trial.is_high ? spec.high : spec.low;

      const int n_beats = spec.min_beats +
                          static_cast<int>(rng.below(
                              static_cast<uint64_t>(spec.max_beats - spec.min_beats + 1)));
      const double mu = std::clamp(cp.mean_s + offset, lo, hi);
      const double innov_sd = cp.sd_s * std::sqrt(1.0 - cp.rho * cp.rho);

      trial.ibis_s.resize(static_cast<size_t>(n_beats));
      double x = mu + rng.normal(0.0, cp.sd_s);  // stationary start
      trial.ibis_s[0] = std::clamp(x, lo, hi);
      for (int k = 1; k < n_beats; ++k) {
        x = mu + cp.rho * (x - mu) + rng.normal(0.0, innov_sd);
        trial.ibis_s[static_cast<size_t>(k)] = std::clamp(x, lo, hi);
      }

      const double midpoint = 0.5 * (spec.scale_min + spec.scale_max);
      const double raw = trial.is_high ? midpoint + 2.0 : midpoint - 2.0;
      trial.valence_raw = std::clamp(raw, spec.scale_min, spec.scale_max);
      out.push_back(std::move(trial));
    }
  }
  return out;
}

Dataset synth_ibi_dataset(const SyntheticSpec& spec) {
  const auto trials = synth_trials(spec);
  Index pad = 0;
  for (const auto& t : trials) pad = std::max(pad, static_cast<Index>(t.ibis_s.size()));

  Dataset ds;
  ds.name = "synthetic";
  ds.pad_length = pad;
  ds.samples.reserve(trials.size());
  for (const auto& t : trials) {
    TrialSample sample;
    sample.subject_id = t.subject_id;
    sample.trial_id = t.trial_id;
    sample.valence_raw = t.valence_raw;
    sample.scale_min = spec.scale_min;
    sample.scale_max = spec.scale_max;
    sample.prepared = signal::zero_pad(signal::zscore(t.ibis_s), pad);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

std::pair<signal::EcgRecord, signal::BeatSequence> synth_ecg(
    const std::vector<double>& beat_times_s, double duration_s, double sample_rate_hz,
    double noise_sd_mv, uint64_t seed) {
  if (duration_s <= 0.0 || sample_rate_hz <= 0.0)
    throw Error(Errc::invalid_beat_times, "duration and sample rate must be positive");
  for (size_t i = 0; i < beat_times_s.size(); ++i) {
    if (beat_times_s[i] < 0.0 || beat_times_s[i] >= duration_s)
      throw Error(Errc::invalid_beat_times,
                  "beat time " + fmt_double(beat_times_s[i]) + " outside [0, duration)");
    if (i > 0 && beat_times_s[i] <= beat_times_s[i - 1])
      throw Error(Errc::invalid_beat_times, "beat times must be strictly increasing");
  }

  const Index n = static_cast<Index>(std::llround(duration_s * sample_rate_hz));
  const double sigma_s = 0.02;  // QRS template width
  signal::EcgRecord ecg;
  ecg.sample_rate_hz = sample_rate_hz;
  ecg.samples = Vec::Zero(n);

  signal::BeatSequence truth;
  truth.sample_rate_hz = sample_rate_hz;
  const Index reach = static_cast<Index>(std::ceil(5.0 * sigma_s * sample_rate_hz));
  for (double bt : beat_times_s) {
    const Index center = static_cast<Index>(std::llround(bt * sample_rate_hz));
    if (center < n) truth.r_peak_indices.push_back(center);
    const Index from = std::max<Index>(0, center - reach);
    const Index to = std::min<Index>(n - 1, center + reach);
    for (Index k = from; k <= to; ++k) {
      const double dt = static_cast<double>(k) / sample_rate_hz - bt;
      ecg.samples[k] += std::exp(-0.5 * (dt / sigma_s) * (dt / sigma_s));
    }
  }
  if (noise_sd_mv > 0.0) {
    Rng rng(derive_seed(seed, "noise"));
    for (Index k = 0; k < n; ++k) ecg.samples[k] += rng.normal(0.0, noise_sd_mv);
  }
  return {std::move(ecg), std::move(truth)};
}

void write_corpus(const std::filesystem::path& root, const SyntheticSpec& spec) {
  const auto trials = synth_trials(spec);
  std::filesystem::create_directories(root);

  std::vector<ManifestRecord> records;
  records.reserve(trials.size());
  for (const auto& t : trials) {
    records.push_back({t.subject_id, t.trial_id, spec.sample_rate_hz, t.valence_raw,
                       spec.scale_min, spec.scale_max});
    write_text_file(ibi_path(root, t.subject_id, t.trial_id), ibi_csv(t.ibis_s));

    if (spec.emit_ecg) {
      std::vector<double> beat_times;
      beat_times.reserve(t.ibis_s.size() + 1);
      double acc = 0.5;  // lead-in before the first beat
      beat_times.push_back(acc);
      for (double v : t.ibis_s) {
        acc += v;
        beat_times.push_back(acc);
      }
      const double duration = acc + 1.0;
      const auto [ecg, truth] = synth_ecg(beat_times, duration, spec.sample_rate_hz,
                                          spec.noise_sd_mv,
                                          derive_seed(spec.seed, t.subject_id + t.trial_id));
      write_text_file(ecg_path(root, t.subject_id, t.trial_id),
                      ecg_csv(ecg.samples, spec.sample_rate_hz));
    }
  }
  write_text_file(root / "manifest.csv", manifest_csv(records));
}

}  // namespace heartval::data
