#include "heartval/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include "CLI11.hpp"
#include "heartval/error.hpp"
#include "heartval/eval.hpp"
#include "heartval/io_util.hpp"
#include "heartval/nn/model_io.hpp"
#include "heartval/nn/train.hpp"
#include "heartval/rng.hpp"

namespace heartval::cli {

namespace {

bool parse_flag(const std::string& key, std::string_view value) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw Error(Errc::invalid_config, key + " must be 0/1/true/false");
}

std::vector<int> parse_int_list(std::string_view value) {
  std::vector<int> out;
  for (const auto& tok : split(value, ','))
    out.push_back(static_cast<int>(parse_long(trim(tok))));
  return out;
}

std::vector<double> parse_double_list(std::string_view value) {
  std::vector<double> out;
  for (const auto& tok : split(value, ',')) out.push_back(parse_double(trim(tok)));
  return out;
}

std::string int_list_text(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string double_list_text(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(values[i]);
  }
  return out;
}

// The trainable hyperparameters, shared between run configs and sweep grids.
bool apply_model_key(nn::ModelConfig& m, const std::string& key, std::string_view value) {
  if (key == "conv_windows") m.conv_windows = parse_int_list(value);
  else if (key == "conv_filters") m.conv_filters = static_cast<int>(parse_long(value));
  else if (key == "conv_dropout_rate") m.conv_dropout_rate = parse_double(value);
  else if (key == "lstm_hidden_units") m.lstm_hidden_units = static_cast<int>(parse_long(value));
  else if (key == "lstm_dropout_rate") m.lstm_dropout_rate = parse_double(value);
  else if (key == "dense_output_dim") m.dense_output_dim = static_cast<int>(parse_long(value));
  else if (key == "epochs") m.epochs = static_cast<int>(parse_long(value));
  else if (key == "lr_initial") m.lr_initial = parse_double(value);
  else if (key == "lr_floor") m.lr_floor = parse_double(value);
  else if (key == "lr_patience_epochs") m.lr_patience_epochs = static_cast<int>(parse_long(value));
  else if (key == "batch_size") m.batch_size = static_cast<int>(parse_long(value));
  else return false;
  return true;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    try {
      if (apply_model_key(c.model, key, value)) continue;
      if (key == "dataset_root") c.dataset_root = value;
      else if (key == "out_dir") c.out_dir = value;
      else if (key == "input_kind") c.input_kind = value;
      else if (key == "scale_min") c.model.scale_min = parse_double(value);
      else if (key == "scale_max") c.model.scale_max = parse_double(value);
      else if (key == "input_length") c.model.input_length = parse_long(value);
      else if (key == "seed") c.model.seed = static_cast<uint64_t>(parse_long(value));
      else if (key == "n_passes") c.n_passes = static_cast<int>(parse_long(value));
      else if (key == "alphas") c.alphas = parse_double_list(value);
      else if (key == "k_out") c.k_out = static_cast<int>(parse_long(value));
      else if (key == "n_folds") c.n_folds = static_cast<int>(parse_long(value));
      else if (key == "n_val_subjects") c.n_val_subjects = static_cast<int>(parse_long(value));
      else if (key == "workers") c.workers = static_cast<int>(parse_long(value));
      else if (key == "dump_posteriors") c.dump_posteriors = parse_flag(key, value);
      else throw Error(Errc::invalid_config, "unknown key '" + key + "'");
    } catch (const Error& e) {
      if (e.code() == Errc::invalid_config) throw;
      throw Error(Errc::invalid_config, "key '" + key + "': " + e.what());
    }
  }
  if (c.input_kind != "auto" && c.input_kind != "ibi" && c.input_kind != "ecg")
    throw Error(Errc::invalid_config, "input_kind must be auto, ibi, or ecg");
  return c;
}

std::string run_config_text(const RunConfig& c) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("dataset_root", c.dataset_root.string());
  line("out_dir", c.out_dir.string());
  line("input_kind", c.input_kind);
  line("conv_windows", int_list_text(c.model.conv_windows));
  line("conv_filters", std::to_string(c.model.conv_filters));
  line("conv_dropout_rate", fmt_double(c.model.conv_dropout_rate));
  line("lstm_hidden_units", std::to_string(c.model.lstm_hidden_units));
  line("lstm_dropout_rate", fmt_double(c.model.lstm_dropout_rate));
  line("dense_output_dim", std::to_string(c.model.dense_output_dim));
  line("epochs", std::to_string(c.model.epochs));
  line("lr_initial", fmt_double(c.model.lr_initial));
  line("lr_floor", fmt_double(c.model.lr_floor));
  line("lr_patience_epochs", std::to_string(c.model.lr_patience_epochs));
  line("batch_size", std::to_string(c.model.batch_size));
  line("scale_min", fmt_double(c.model.scale_min));
  line("scale_max", fmt_double(c.model.scale_max));
  line("input_length", std::to_string(c.model.input_length));
  line("seed", std::to_string(c.model.seed));
  line("n_passes", std::to_string(c.n_passes));
  line("alphas", double_list_text(c.alphas));
  line("k_out", std::to_string(c.k_out));
  line("n_folds", std::to_string(c.n_folds));
  line("n_val_subjects", std::to_string(c.n_val_subjects));
  line("workers", std::to_string(c.workers));
  line("dump_posteriors", c.dump_posteriors ? "1" : "0");
  return out;
}

data::SyntheticSpec parse_synth_spec(const std::string& text) {
  data::SyntheticSpec s;
  try {
    for (const auto& [key, value] : parse_key_values(text)) {
      if (key == "n_subjects") s.n_subjects = static_cast<int>(parse_long(value));
      else if (key == "trials_per_subject") s.trials_per_subject = static_cast<int>(parse_long(value));
      else if (key == "balance") s.balance = parse_double(value);
      else if (key == "low_mean_s") s.low.mean_s = parse_double(value);
      else if (key == "low_sd_s") s.low.sd_s = parse_double(value);
      else if (key == "low_rho") s.low.rho = parse_double(value);
      else if (key == "high_mean_s") s.high.mean_s = parse_double(value);
      else if (key == "high_sd_s") s.high.sd_s = parse_double(value);
      else if (key == "high_rho") s.high.rho = parse_double(value);
      else if (key == "min_beats") s.min_beats = static_cast<int>(parse_long(value));
      else if (key == "max_beats") s.max_beats = static_cast<int>(parse_long(value));
      else if (key == "scale_min") s.scale_min = parse_double(value);
      else if (key == "scale_max") s.scale_max = parse_double(value);
      else if (key == "subject_offset_sd_s") s.subject_offset_sd_s = parse_double(value);
      else if (key == "seed") s.seed = static_cast<uint64_t>(parse_long(value));
      else if (key == "emit_ecg") s.emit_ecg = parse_flag(key, value);
      else if (key == "sample_rate_hz") s.sample_rate_hz = parse_double(value);
      else if (key == "noise_sd_mv") s.noise_sd_mv = parse_double(value);
      else throw Error(Errc::invalid_spec, "unknown key '" + key + "'");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_spec) throw;
    throw Error(Errc::invalid_spec, e.what());
  }
  return s;
}

std::string synth_spec_text(const data::SyntheticSpec& s) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("n_subjects", std::to_string(s.n_subjects));
  line("trials_per_subject", std::to_string(s.trials_per_subject));
  line("balance", fmt_double(s.balance));
  line("low_mean_s", fmt_double(s.low.mean_s));
  line("low_sd_s", fmt_double(s.low.sd_s));
  line("low_rho", fmt_double(s.low.rho));
  line("high_mean_s", fmt_double(s.high.mean_s));
  line("high_sd_s", fmt_double(s.high.sd_s));
  line("high_rho", fmt_double(s.high.rho));
  line("min_beats", std::to_string(s.min_beats));
  line("max_beats", std::to_string(s.max_beats));
  line("scale_min", fmt_double(s.scale_min));
  line("scale_max", fmt_double(s.scale_max));
  line("subject_offset_sd_s", fmt_double(s.subject_offset_sd_s));
  line("seed", std::to_string(s.seed));
  line("emit_ecg", s.emit_ecg ? "1" : "0");
  line("sample_rate_hz", fmt_double(s.sample_rate_hz));
  line("noise_sd_mv", fmt_double(s.noise_sd_mv));
  return out;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string skipped_csv(const std::vector<data::SkippedTrial>& skipped) {
  std::string out = "subject_id,trial_id,reason\n";
  for (const auto& s : skipped) {
    out += s.subject_id;
    out += ',';
    out += s.trial_id;
    out += ',';
    out += csv_quote(s.reason);
    out += '\n';
  }
  return out;
}

bool use_precomputed_ibi(const RunConfig& c) {
  if (c.input_kind == "ibi") return true;
  if (c.input_kind == "ecg") return false;
  const auto rows = data::read_manifest(c.dataset_root);
  size_t with_ibi = 0;
  for (const auto& r : rows)
    if (std::filesystem::exists(data::ibi_path(c.dataset_root, r.subject_id, r.trial_id)))
      ++with_ibi;
  if (with_ibi == rows.size()) return true;
  if (with_ibi == 0) return false;
  throw Error(Errc::invalid_config,
              "corpus mixes trials with and without .ibi.csv files; set input_kind");
}

// Deterministic single-model split: shuffle subjects, first n_val validate.
void split_subjects(const data::Dataset& ds, int n_val, uint64_t seed,
                    std::unordered_set<std::string>& val_out) {
  std::vector<std::string> subjects;
  for (const auto& s : ds.samples) subjects.push_back(s.subject_id);
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  if (static_cast<int>(subjects.size()) <= n_val)
    throw Error(Errc::insufficient_subjects,
                "need more than " + std::to_string(n_val) + " subjects to split off validation");
  Rng rng(derive_seed(seed, "train.split"));
  rng.shuffle(subjects);
  val_out.insert(subjects.begin(), subjects.begin() + n_val);
}

std::pair<std::vector<nn::LabeledSeries>, std::vector<nn::LabeledSeries>> split_labeled(
    const data::Dataset& ds, const std::unordered_set<std::string>& val_subjects) {
  std::vector<nn::LabeledSeries> train, val;
  for (const auto& s : ds.samples) {
    const double y = (s.valence_raw - s.scale_min) / (s.scale_max - s.scale_min);
    auto& dest = val_subjects.count(s.subject_id) ? val : train;
    dest.push_back({s.prepared.values, y});
  }
  return {std::move(train), std::move(val)};
}

std::string history_csv(const nn::TrainHistory& history) {
  std::string out = "epoch,train_mse,val_mse,lr\n";
  for (size_t i = 0; i < history.epochs.size(); ++i) {
    const auto& e = history.epochs[i];
    out += std::to_string(i + 1);
    out += ',';
    out += fmt_double(e.train_mse);
    out += ',';
    out += fmt_double(e.val_mse);
    out += ',';
    out += fmt_double(e.learning_rate);
    out += '\n';
  }
  return out;
}

int cmd_preprocess(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto rows = data::read_manifest(c.dataset_root);
  std::vector<data::SkippedTrial> skipped;
  size_t converted = 0;
  for (const auto& row : rows) {
    try {
      signal::EcgRecord ecg;
      ecg.subject_id = row.subject_id;
      ecg.trial_id = row.trial_id;
      ecg.sample_rate_hz = row.sample_rate_hz;
      ecg.samples = data::read_ecg_samples(data::ecg_path(c.dataset_root, row.subject_id,
                                                          row.trial_id));
      const auto beats = signal::detect_r_peaks(ecg);
      const auto ibi = signal::extract_ibi(beats, row.subject_id, row.trial_id);
      write_text_file(data::ibi_path(c.out_dir, row.subject_id, row.trial_id),
                      data::ibi_csv(ibi.intervals_s));
      ++converted;
    } catch (const Error& e) {
      skipped.push_back({row.subject_id, row.trial_id, e.what()});
      err << row.subject_id << "/" << row.trial_id << " skipped: " << e.what() << "\n";
    }
  }
  write_text_file(c.out_dir / "manifest.csv", data::manifest_csv(rows));
  write_text_file(c.out_dir / "skipped.csv", skipped_csv(skipped));
  write_text_file(c.out_dir / "config.txt", run_config_text(c));
  out << converted << " of " << rows.size() << " trials converted to IBI series\n";
  if (converted == 0)
    throw Error(Errc::all_trials_skipped, "no trial could be preprocessed");
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto loaded = data::load_dataset(c.dataset_root, use_precomputed_ibi(c));
  for (const auto& s : loaded.skipped)
    err << s.subject_id << "/" << s.trial_id << " skipped: " << s.reason << "\n";

  std::unordered_set<std::string> val_subjects;
  split_subjects(loaded.dataset, c.n_val_subjects, c.model.seed, val_subjects);
  auto [train_set, val_set] = split_labeled(loaded.dataset, val_subjects);

  nn::ModelConfig model = c.model;
  model.input_length = loaded.dataset.pad_length;
  const auto [params, history] =
      nn::train(model, train_set, val_set, derive_seed(c.model.seed, "train"));

  nn::save_model(c.out_dir, {model, params});
  write_text_file(c.out_dir / "history.csv", history_csv(history));
  write_text_file(c.out_dir / "skipped.csv", skipped_csv(loaded.skipped));
  write_text_file(c.out_dir / "config.txt", run_config_text(c));
  out << "trained on " << train_set.size() << " trials, validated on " << val_set.size()
      << "; best epoch " << history.best_epoch << " val mse " << fmt_double(history.best_val_mse)
      << "\n";
  return kExitOk;
}

bool is_fold_failure(const char* what) {
  std::string_view w(what);
  if (w.starts_with("fold ")) return true;
  const auto pos = w.find(": ");
  return pos != std::string_view::npos && w.substr(pos + 2).starts_with("fold ");
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto loaded = data::load_dataset(c.dataset_root, use_precomputed_ibi(c));
  for (const auto& s : loaded.skipped)
    err << s.subject_id << "/" << s.trial_id << " skipped: " << s.reason << "\n";

  eval::CvOptions options;
  options.k_out = c.k_out;
  options.n_folds = c.n_folds;
  options.n_val_subjects = c.n_val_subjects;
  options.n_passes = c.n_passes;
  options.alphas = c.alphas;
  options.seed = c.model.seed;
  options.workers = c.workers;
  if (c.dump_posteriors) options.posterior_dir = c.out_dir / "posteriors";

  eval::CvReport report;
  try {
    report = eval::run_cross_validation(loaded.dataset, c.model, options);
  } catch (const std::exception& e) {
    if (is_fold_failure(e.what())) {
      err << e.what() << "\n";
      return kExitFoldFailure;
    }
    throw;
  }

  eval::write_cv_outputs(c.out_dir, report);
  write_text_file(c.out_dir / "skipped.csv", skipped_csv(loaded.skipped));
  write_text_file(c.out_dir / "config.txt", run_config_text(c));
  out << eval::summary_text(report);
  return kExitOk;
}

struct GridRow {
  std::string canonical;  // key=value;key=value in row order
  nn::ModelConfig model;
};

std::vector<GridRow> parse_grid(const std::string& text, const nn::ModelConfig& base) {
  std::vector<GridRow> rows;
  const auto lines = split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "row " + std::to_string(i + 1) + ": ";
    GridRow row;
    row.model = base;
    for (const auto& item : split(line, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw Error(Errc::invalid_config, where + "expected key=value, got '" + item + "'");
      const std::string key(trim(item.substr(0, eq)));
      const std::string_view value = trim(item.substr(eq + 1));
      try {
        if (!apply_model_key(row.model, key, value))
          throw Error(Errc::invalid_config, "'" + key + "' is not a sweepable hyperparameter");
      } catch (const Error& e) {
        throw Error(Errc::invalid_config, where + e.what());
      }
      if (!row.canonical.empty()) row.canonical += ';';
      row.canonical += key;
      row.canonical += '=';
      row.canonical += std::string(value);
    }
    if (row.canonical.empty())
      throw Error(Errc::invalid_config, where + "no overrides");
    try {
      nn::validate(row.model);
    } catch (const Error& e) {
      throw Error(Errc::invalid_config, where + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::invalid_config, "grid lists no combinations");
  return rows;
}

int cmd_sweep(const RunConfig& c, const std::string& grid_path, std::ostream& out,
              std::ostream& err) {
  if (grid_path.empty()) throw Error(Errc::invalid_config, "--grid is required for sweep");
  const std::string grid_text = read_text_file(grid_path);
  std::vector<GridRow> grid;
  try {
    grid = parse_grid(grid_text, c.model);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitMalformedGrid;
  }

  const auto loaded = data::load_dataset(c.dataset_root, use_precomputed_ibi(c));
  std::unordered_set<std::string> val_subjects;
  split_subjects(loaded.dataset, c.n_val_subjects, c.model.seed, val_subjects);
  const auto [train_set, val_set] = split_labeled(loaded.dataset, val_subjects);

  struct RowResult {
    int best_epoch = 0;
    double best_val_mse = 0.0;
  };
  std::vector<RowResult> results;
  size_t winner = 0;
  for (size_t r = 0; r < grid.size(); ++r) {
    nn::ModelConfig model = grid[r].model;
    model.input_length = loaded.dataset.pad_length;
    const auto [params, history] =
        nn::train(model, train_set, val_set, derive_seed(c.model.seed, "train"));
    results.push_back({history.best_epoch, history.best_val_mse});
    if (results[r].best_val_mse < results[winner].best_val_mse) winner = r;
    err << "row " << (r + 1) << " [" << grid[r].canonical << "] best val mse "
        << fmt_double(history.best_val_mse) << "\n";
  }

  std::string csv = "row,overrides,best_epoch,best_val_mse,winner\n";
  for (size_t r = 0; r < grid.size(); ++r) {
    csv += std::to_string(r + 1);
    csv += ',';
    csv += grid[r].canonical;
    csv += ',';
    csv += std::to_string(results[r].best_epoch);
    csv += ',';
    csv += fmt_double(results[r].best_val_mse);
    csv += ',';
    csv += (r == winner) ? '1' : '0';
    csv += '\n';
  }
  write_text_file(c.out_dir / "sweep.csv", csv);
  write_text_file(c.out_dir / "grid.txt", grid_text);
  write_text_file(c.out_dir / "config.txt", run_config_text(c));
  out << "winner: row " << (winner + 1) << " [" << grid[winner].canonical << "] val mse "
      << fmt_double(results[winner].best_val_mse) << "\n";
  return kExitOk;
}

int cmd_synth(const data::SyntheticSpec& spec, const std::filesystem::path& out_dir,
              std::ostream& out) {
  data::write_corpus(out_dir, spec);
  const auto trials = data::synth_trials(spec);
  std::string labels = "subject_id,trial_id,label\n";
  for (const auto& t : trials) {
    labels += t.subject_id;
    labels += ',';
    labels += t.trial_id;
    labels += ',';
    labels += t.is_high ? "high" : "low";
    labels += '\n';
  }
  write_text_file(out_dir / "labels.csv", labels);
  write_text_file(out_dir / "spec.txt", synth_spec_text(spec));
  out << trials.size() << " trials written to " << out_dir.string() << "\n";
  return kExitOk;
}

// Rebuilds summary.txt from a previous evaluate's CSV artifacts.
int cmd_report(const std::filesystem::path& dir, std::ostream& out) {
  const std::string text = read_text_file(dir / "report.csv");
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "fold,alpha,accuracy,coverage,macro_f1,n_committed,n_total")
    throw Error(Errc::malformed_row, "report.csv: unexpected header");

  std::vector<eval::FoldRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7)
      throw Error(Errc::malformed_row, "report.csv line " + std::to_string(i + 1));
    eval::FoldRow row;
    row.fold = static_cast<int>(parse_long(fields[0]));
    row.alpha = parse_double(fields[1]);
    if (!trim(fields[2]).empty()) row.accuracy = parse_double(fields[2]);
    row.coverage = parse_double(fields[3]);
    if (!trim(fields[4]).empty()) row.macro_f1 = parse_double(fields[4]);
    row.n_committed = parse_long(fields[5]);
    row.n_total = parse_long(fields[6]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::empty_records, "report.csv has no rows");

  std::vector<int> folds;
  std::vector<double> alphas;
  for (const auto& r : rows) {
    if (std::find(folds.begin(), folds.end(), r.fold) == folds.end()) folds.push_back(r.fold);
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end())
      alphas.push_back(r.alpha);
  }

  std::string summary;
  summary += "source=report.csv\n";
  summary += "n_folds=" + std::to_string(folds.size()) + "\n";
  auto opt_text = [](const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string("none");
  };
  for (double alpha : alphas) {
    double acc_sum = 0.0, f1_sum = 0.0, cov_sum = 0.0;
    int acc_n = 0, f1_n = 0, cov_n = 0;
    long committed = 0, total = 0, correct = 0;
    for (const auto& r : rows) {
      if (r.alpha != alpha) continue;
      cov_sum += r.coverage;
      cov_n += 1;
      committed += r.n_committed;
      total += r.n_total;
      if (r.accuracy) {
        acc_sum += *r.accuracy;
        acc_n += 1;
        correct += std::lround(*r.accuracy * static_cast<double>(r.n_committed));
      }
      if (r.macro_f1) {
        f1_sum += *r.macro_f1;
        f1_n += 1;
      }
    }
    std::optional<double> mean_acc, mean_f1, pooled_acc;
    if (acc_n > 0) mean_acc = acc_sum / acc_n;
    if (f1_n > 0) mean_f1 = f1_sum / f1_n;
    if (committed > 0)
      pooled_acc = static_cast<double>(correct) / static_cast<double>(committed);
    summary += "alpha=" + fmt_double(alpha);
    summary += " mean_accuracy=" + opt_text(mean_acc);
    summary += " mean_coverage=" + fmt_double(cov_sum / cov_n);
    summary += " mean_macro_f1=" + opt_text(mean_f1);
    summary += " pooled_accuracy=" + opt_text(pooled_acc);
    summary += " pooled_coverage=" +
               fmt_double(static_cast<double>(committed) / static_cast<double>(total));
    summary += " n_committed=" + std::to_string(committed);
    summary += " n_total=" + std::to_string(total);
    summary += '\n';
  }

  const auto unc_path = dir / "uncertainty.csv";
  if (std::filesystem::exists(unc_path)) {
    const std::string unc = read_text_file(unc_path);
    const auto unc_lines = split(unc, '\n');
    if (unc_lines.empty() || trim(unc_lines[0]) != "subject,trial,true_class,posterior_variance")
      throw Error(Errc::malformed_row, "uncertainty.csv: unexpected header");
    std::vector<double> var_low, var_high;
    for (size_t i = 1; i < unc_lines.size(); ++i) {
      const std::string_view line = trim(unc_lines[i]);
      if (line.empty()) continue;
      const auto fields = split(line, ',');
      if (fields.size() != 4)
        throw Error(Errc::malformed_row, "uncertainty.csv line " + std::to_string(i + 1));
      const std::string_view cls = trim(fields[2]);
      if (cls != "low" && cls != "high")
        throw Error(Errc::malformed_row,
                    "uncertainty.csv line " + std::to_string(i + 1) + ": unknown class");
      (cls == "high" ? var_high : var_low).push_back(parse_double(fields[3]));
    }
    if (!var_low.empty() && !var_high.empty()) {
      const auto res = eval::mann_whitney_u(var_low, var_high);
      double mean_low = 0.0, mean_high = 0.0;
      for (double v : var_low) mean_low += v;
      for (double v : var_high) mean_high += v;
      mean_low /= static_cast<double>(var_low.size());
      mean_high /= static_cast<double>(var_high.size());
      const char* direction = mean_low > mean_high  ? "low>high"
                              : mean_low < mean_high ? "low<high"
                                                     : "low=high";
      summary += "mann_whitney u=" + fmt_double(res.u);
      summary += " p=" + fmt_double(res.p);
      summary += " direction=" + std::string(direction);
      summary += " n_low=" + std::to_string(var_low.size());
      summary += " n_high=" + std::to_string(var_high.size());
      summary += " mean_var_low=" + fmt_double(mean_low);
      summary += " mean_var_high=" + fmt_double(mean_high);
      summary += '\n';
    } else {
      summary += "mann_whitney undefined (needs both classes in the test pool)\n";
    }
  } else {
    summary += "mann_whitney unavailable (no uncertainty.csv)\n";
  }

  write_text_file(dir / "summary.txt", summary);
  out << summary;
  return kExitOk;
}

int map_errc(Errc code) {
  switch (code) {
    case Errc::missing_manifest:
    case Errc::all_trials_skipped:
      return kExitMissingManifest;
    case Errc::non_finite_loss:
      return kExitNonFiniteLoss;
    case Errc::invalid_spec:
      return kExitInvalidSpec;
    default:
      return kExitUsage;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"heartbeat-interval valence pipeline", "heartval"};
  app.require_subcommand(1);

  std::string config_path, grid_path, out_override;
  uint64_t seed_override = 0;
  int workers_override = 0;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path, "key=value config file");
    if (config_required) opt->required();
    cmd->add_option("--out", out_override, "output directory (overrides out_dir)");
    cmd->add_option("--seed", seed_override, "seed override");
    cmd->add_option("--workers", workers_override, "worker thread override");
  };

  auto* pre = app.add_subcommand("preprocess", "convert manifest ECG trials to IBI files");
  add_common(pre, true);
  auto* train = app.add_subcommand("train", "train one model on a corpus");
  add_common(train, true);
  auto* evaluate = app.add_subcommand("evaluate", "leave-k-subjects-out cross validation");
  add_common(evaluate, true);
  auto* sweep = app.add_subcommand("sweep", "grid search over hyperparameters");
  add_common(sweep, true);
  sweep->add_option("--grid", grid_path, "grid file, one key=value[,key=value...] row per line")
      ->required();
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  add_common(synth, true);
  auto* report = app.add_subcommand("report", "regenerate summary.txt from CSV artifacts");
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (report->parsed()) {
      std::filesystem::path dir = out_override;
      if (!config_path.empty() && dir.empty())
        dir = parse_run_config(read_text_file(config_path)).out_dir;
      if (dir.empty())
        throw Error(Errc::invalid_config, "report needs --out or a config with out_dir");
      return cmd_report(dir, out);
    }
    if (synth->parsed()) {
      auto spec = parse_synth_spec(read_text_file(config_path));
      if (synth->count("--seed") > 0) spec.seed = seed_override;
      if (out_override.empty())
        throw Error(Errc::invalid_config, "synth needs --out");
      return cmd_synth(spec, out_override, out);
    }

    RunConfig config = parse_run_config(read_text_file(config_path));
    CLI::App* active = pre->parsed()        ? pre
                       : train->parsed()    ? train
                       : evaluate->parsed() ? evaluate
                                            : sweep;
    if (active->count("--seed") > 0) config.model.seed = seed_override;
    if (active->count("--workers") > 0) config.workers = workers_override;
    if (!out_override.empty()) config.out_dir = out_override;
    if (config.out_dir.empty())
      throw Error(Errc::invalid_config, "no output directory (out_dir key or --out)");
    if (config.dataset_root.empty())
      throw Error(Errc::invalid_config, "config needs dataset_root");

    if (pre->parsed()) return cmd_preprocess(config, out, err);
    if (train->parsed()) return cmd_train(config, out, err);
    if (evaluate->parsed()) return cmd_evaluate(config, out, err);
    return cmd_sweep(config, grid_path, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return map_errc(e.code());
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace heartval::cli
