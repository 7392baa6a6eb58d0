#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heartval/bayes.hpp"
#include "heartval/data.hpp"
#include "heartval/nn/train.hpp"

namespace heartval::eval {

using bayes::ClassZones;
using bayes::ValencePosterior;

// Midpoint split of the raw rating scale; a midpoint-exact rating is low,
// matching the boundary-to-lower-zone convention. Throws OutOfScale.
std::string binarize_label(double valence_raw, double scale_min, double scale_max);

struct Fold {
  std::vector<std::string> train_subjects;
  std::vector<std::string> val_subjects;
  std::vector<std::string> test_subjects;
};

struct FoldPlan {
  std::vector<Fold> folds;
  int k_out = 1;
  uint64_t seed = 0;
};

// Shuffles the (sorted, deduplicated) subjects by seed, carves n_folds
// disjoint test blocks of k_out subjects, and assigns each fold a validation
// block of n_val_subjects walking cyclically from the end of its test block;
// everyone else trains. Subjects beyond n_folds * k_out are never tested.
// Throws InsufficientSubjects when the blocks cannot be carved.
FoldPlan make_folds(std::vector<std::string> subject_ids, int k_out, int n_folds,
                    uint64_t seed, int n_val_subjects = 4);

struct EvalRecord {
  std::string subject_id;
  std::string trial_id;
  std::string true_label;
  ValencePosterior posterior;
};

// Row = true label, column = predicted label, trailing column = abstained.
struct Confusion {
  std::vector<std::string> labels;
  std::vector<std::vector<long>> counts;
};

struct FoldMetrics {
  std::optional<double> accuracy;  // absent when nothing was committed
  double coverage = 0.0;
  std::optional<double> macro_f1;  // absent when no class has support
  Confusion confusion;
  long n_committed = 0;
  long n_total = 0;
};

// Classify every record at alpha; abstentions count toward coverage only.
// Throws EmptyRecords.
FoldMetrics evaluate_fold(const std::vector<EvalRecord>& records, const ClassZones& zones,
                          double alpha);

struct AlphaSweepRow {
  double alpha = 0.0;
  FoldMetrics metrics;
};

// evaluate_fold per alpha. Coverage must be non-increasing once rows are
// ordered by alpha; a violation indicates a classify bug and throws
// logic_error.
std::vector<AlphaSweepRow> alpha_sweep(const std::vector<EvalRecord>& records,
                                       const ClassZones& zones,
                                       const std::vector<double>& alphas);

struct MwuResult {
  double u = 0.0;  // U statistic of the first sample
  double p = 1.0;  // two-sided
};

// Midrank U test; exact enumeration when the pooled size is at most 20,
// normal approximation with tie and continuity corrections otherwise.
// Throws EmptyInput.
MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// The two p-value routes, exposed so they can be cross-checked directly.
double mwu_exact_p(const std::vector<double>& a, const std::vector<double>& b);
double mwu_normal_p(const std::vector<double>& a, const std::vector<double>& b);

struct CvOptions {
  int k_out = 0;  // 0 = floor(n_subjects / n_folds)
  int n_folds = 10;
  int n_val_subjects = 4;
  int n_passes = 1000;
  std::vector<double> alphas = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  uint64_t seed = 42;
  int workers = 1;
  std::filesystem::path posterior_dir;  // when set, dump per-trial posteriors
};

struct FoldRow {
  int fold = 0;
  double alpha = 0.0;
  std::optional<double> accuracy;
  double coverage = 0.0;
  std::optional<double> macro_f1;
  long n_committed = 0;
  long n_total = 0;
};

struct AlphaAggregate {
  double alpha = 0.0;
  std::optional<double> mean_accuracy;  // over folds where defined
  double mean_coverage = 0.0;
  std::optional<double> mean_macro_f1;
  std::optional<double> pooled_accuracy;  // over all committed test trials
  double pooled_coverage = 0.0;
  long n_committed = 0;
  long n_total = 0;
};

struct UncertaintyRow {
  std::string subject_id;
  std::string trial_id;
  std::string true_class;
  double posterior_variance = 0.0;
};

struct MwuSummary {
  bool defined = false;  // both classes present with >= 1 variance each
  double u = 0.0;
  double p = 1.0;
  std::string direction;  // e.g. "low>high" comparing mean variances
  long n_low = 0;
  long n_high = 0;
  double mean_var_low = 0.0;
  double mean_var_high = 0.0;
};

struct FoldSummary {
  int fold = 0;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  Index pad_length = 0;
  std::vector<std::string> test_subjects;
};

struct CvReport {
  FoldPlan plan;
  std::vector<FoldRow> rows;  // fold-major, then alpha
  std::vector<AlphaAggregate> aggregates;
  std::vector<Confusion> pooled_confusions;  // one per alpha, all folds pooled
  std::vector<UncertaintyRow> uncertainty;
  MwuSummary mwu;
  std::vector<FoldSummary> fold_summaries;
  std::string dataset_name;
  size_t n_samples = 0;
  CvOptions options;  // echo of what produced the report
};

// The full protocol: per fold, pad train/val series to their own longest
// sample (test series truncated to fit), train with the fold's derived seed,
// sample a posterior per test trial, then score across alphas. Any fold
// failure aborts the run tagged with the fold index. workers > 1 runs folds
// concurrently with identical output.
CvReport run_cross_validation(const data::Dataset& dataset, const nn::ModelConfig& model_config,
                              const CvOptions& options);

std::string report_csv(const std::vector<FoldRow>& rows);
std::string confusion_csv(const Confusion& confusion);
std::string uncertainty_csv(const std::vector<UncertaintyRow>& rows);
std::string summary_text(const CvReport& report);

// Writes report.csv, confusion_<alpha>.csv per alpha, uncertainty.csv, and
// summary.txt into out_dir.
void write_cv_outputs(const std::filesystem::path& out_dir, const CvReport& report);

}  // namespace heartval::eval
