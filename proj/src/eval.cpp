#include "heartval/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "heartval/error.hpp"
#include "heartval/io_util.hpp"
#include "heartval/rng.hpp"

namespace heartval::eval {

std::string binarize_label(double valence_raw, double scale_min, double scale_max) {
  if (!(scale_min < scale_max))
    throw Error(Errc::out_of_scale, "scale_min must be < scale_max");
  if (valence_raw < scale_min || valence_raw > scale_max)
    throw Error(Errc::out_of_scale, "rating " + fmt_double(valence_raw) + " outside [" +
                                        fmt_double(scale_min) + ", " + fmt_double(scale_max) +
                                        "]");
  const double midpoint = 0.5 * (scale_min + scale_max);
  return valence_raw > midpoint ? "high" : "low";
}

FoldPlan make_folds(std::vector<std::string> subject_ids, int k_out, int n_folds,
                    uint64_t seed, int n_val_subjects) {
  std::sort(subject_ids.begin(), subject_ids.end());
  subject_ids.erase(std::unique(subject_ids.begin(), subject_ids.end()), subject_ids.end());
  const int n = static_cast<int>(subject_ids.size());

  if (n_folds < 1) throw Error(Errc::invalid_config, "n_folds must be >= 1");
  if (n_val_subjects < 1) throw Error(Errc::invalid_config, "n_val_subjects must be >= 1");
  if (k_out < 1)
    throw Error(Errc::insufficient_subjects, "k_out must be >= 1 (got " +
                                                 std::to_string(k_out) + ")");
  if (n_folds * k_out > n)
    throw Error(Errc::insufficient_subjects,
                std::to_string(n_folds) + " folds x " + std::to_string(k_out) +
                    " held-out subjects need more than the " + std::to_string(n) +
                    " available");
  if (n - k_out - n_val_subjects < 1)
    throw Error(Errc::insufficient_subjects, "no subjects left to train on");

  Rng rng(derive_seed(seed, "folds"));
  rng.shuffle(subject_ids);

  FoldPlan plan;
  plan.k_out = k_out;
  plan.seed = seed;
  for (int f = 0; f < n_folds; ++f) {
    Fold fold;
    std::unordered_set<std::string> in_test;
    for (int j = 0; j < k_out; ++j) {
      fold.test_subjects.push_back(subject_ids[static_cast<size_t>(f * k_out + j)]);
      in_test.insert(fold.test_subjects.back());
    }
    std::unordered_set<std::string> in_val;
    int pos = (f + 1) * k_out % n;
    while (static_cast<int>(fold.val_subjects.size()) < n_val_subjects) {
      const auto& s = subject_ids[static_cast<size_t>(pos)];
      if (!in_test.count(s)) {
        fold.val_subjects.push_back(s);
        in_val.insert(s);
      }
      pos = (pos + 1) % n;
    }
    for (const auto& s : subject_ids)
      if (!in_test.count(s) && !in_val.count(s)) fold.train_subjects.push_back(s);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldMetrics evaluate_fold(const std::vector<EvalRecord>& records, const ClassZones& zones,
                          double alpha) {
  if (records.empty()) throw Error(Errc::empty_records, "no records to evaluate");
  const size_t k = zones.labels.size();
  std::unordered_map<std::string, size_t> zone_index;
  for (size_t z = 0; z < k; ++z) zone_index[zones.labels[z]] = z;

  FoldMetrics m;
  m.confusion.labels = zones.labels;
  m.confusion.counts.assign(k, std::vector<long>(k + 1, 0));
  long correct = 0;
  for (const auto& rec : records) {
    const auto it = zone_index.find(rec.true_label);
    if (it == zone_index.end())
      throw Error(Errc::invalid_config, "label '" + rec.true_label + "' is not a zone label");
    const auto decision = bayes::classify(rec.posterior, zones, alpha);
    const size_t col = decision.committed ? decision.zone : k;
    m.confusion.counts[it->second][col] += 1;
    if (decision.committed) {
      m.n_committed += 1;
      if (decision.zone == it->second) correct += 1;
    }
  }
  m.n_total = static_cast<long>(records.size());
  m.coverage = static_cast<double>(m.n_committed) / static_cast<double>(m.n_total);
  if (m.n_committed > 0)
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n_committed);

  double f1_sum = 0.0;
  int f1_classes = 0;
  for (size_t c = 0; c < k; ++c) {
    const long tp = m.confusion.counts[c][c];
    long fp = 0;
    for (size_t r = 0; r < k; ++r)
      if (r != c) fp += m.confusion.counts[r][c];
    long fn = 0;
    for (size_t c2 = 0; c2 < k; ++c2)
      if (c2 != c) fn += m.confusion.counts[c][c2];
    if (tp + fp + fn > 0) {
      f1_sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
      f1_classes += 1;
    }
  }
  if (f1_classes > 0) m.macro_f1 = f1_sum / static_cast<double>(f1_classes);
  return m;
}

std::vector<AlphaSweepRow> alpha_sweep(const std::vector<EvalRecord>& records,
                                       const ClassZones& zones,
                                       const std::vector<double>& alphas) {
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) rows.push_back({alpha, evaluate_fold(records, zones, alpha)});

  std::vector<AlphaSweepRow> ordered = rows;
  std::sort(ordered.begin(), ordered.end(),
            [](const AlphaSweepRow& a, const AlphaSweepRow& b) { return a.alpha < b.alpha; });
  for (size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i].metrics.coverage > ordered[i - 1].metrics.coverage)
      throw std::logic_error("coverage increased with alpha");
  }
  return rows;
}

namespace {

// Midranks of the pooled sample, in the pooled (a then b) order.
std::vector<double> midranks(const std::vector<double>& pooled) {
  const size_t n = pooled.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return pooled[x] < pooled[y]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

double rank_sum_a(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  double r = 0.0;
  for (size_t i = 0; i < a.size(); ++i) r += ranks[i];
  return r;
}

void check_nonempty(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw Error(Errc::empty_input, "both samples must be non-empty");
}

}  // namespace

double mwu_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  check_nonempty(a, b);
  const size_t na = a.size();
  const size_t nb = b.size();
  const size_t n = na + nb;

  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);

  // Work on ranks doubled to integers: midranks are halves.
  std::vector<long> r2(n);
  long total2 = 0;
  for (size_t i = 0; i < n; ++i) {
    r2[i] = std::lround(2.0 * ranks[i]);
    total2 += r2[i];
  }
  long obs2 = 0;
  for (size_t i = 0; i < na; ++i) obs2 += r2[i];
  // 2|U - mu| = |2R_a - na(na+1) - na nb|
  const long center2 = static_cast<long>(na * (na + 1) + na * nb);
  const long obs_dist = std::labs(obs2 - center2);

  // ways[k][s] = #k-subsets of the pooled ranks with doubled rank-sum s.
  std::vector<std::vector<double>> ways(na + 1,
                                        std::vector<double>(static_cast<size_t>(total2) + 1, 0.0));
  ways[0][0] = 1.0;
  for (size_t i = 0; i < n; ++i) {
    const size_t ri = static_cast<size_t>(r2[i]);
    for (size_t k = std::min(na, i + 1); k >= 1; --k) {
      auto& row = ways[k];
      const auto& prev = ways[k - 1];
      for (size_t s = static_cast<size_t>(total2); s >= ri; --s) {
        if (prev[s - ri] != 0.0) row[s] += prev[s - ri];
      }
    }
  }

  double count = 0.0;
  double total = 0.0;
  for (size_t s = 0; s <= static_cast<size_t>(total2); ++s) {
    const double w = ways[na][s];
    if (w == 0.0) continue;
    total += w;
    const long dist = std::labs(static_cast<long>(s) - center2);
    if (dist >= obs_dist) count += w;
  }
  return count / total;
}

double mwu_normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  check_nonempty(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;

  const double r_a = rank_sum_a(a, b);
  const double u_a = r_a - na * (na + 1.0) / 2.0;
  const double mu = na * nb / 2.0;

  // Tie correction over groups of equal pooled values.
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  double tie_term = 0.0;
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var =
      na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;

  const double z = std::max(0.0, std::abs(u_a - mu) - 0.5) / std::sqrt(var);
  return std::erfc(z / std::sqrt(2.0));
}

MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  check_nonempty(a, b);
  MwuResult res;
  const double na = static_cast<double>(a.size());
  res.u = rank_sum_a(a, b) - na * (na + 1.0) / 2.0;
  res.p = (a.size() + b.size() <= 20) ? mwu_exact_p(a, b) : mwu_normal_p(a, b);
  return res;
}

namespace {

Vec repad(const signal::PreparedSeries& prepared, Index target) {
  Vec out = Vec::Zero(target);
  const Index keep = std::min(prepared.valid_length, target);
  out.head(keep) = prepared.values.head(keep);
  return out;
}

double scale_label(const data::TrialSample& s) {
  return (s.valence_raw - s.scale_min) / (s.scale_max - s.scale_min);
}

struct FoldOutput {
  std::vector<EvalRecord> records;
  std::vector<UncertaintyRow> uncertainty;
  FoldSummary summary;
};

FoldOutput run_fold(const data::Dataset& dataset, const nn::ModelConfig& model_config,
                    const CvOptions& options, const Fold& fold, int fold_index) {
  std::unordered_set<std::string> train_set(fold.train_subjects.begin(),
                                            fold.train_subjects.end());
  std::unordered_set<std::string> val_set(fold.val_subjects.begin(), fold.val_subjects.end());
  std::unordered_set<std::string> test_set(fold.test_subjects.begin(),
                                           fold.test_subjects.end());

  std::vector<size_t> train_idx, val_idx, test_idx;
  for (size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& sid = dataset.samples[i].subject_id;
    if (train_set.count(sid)) train_idx.push_back(i);
    else if (val_set.count(sid)) val_idx.push_back(i);
    else if (test_set.count(sid)) test_idx.push_back(i);
  }
  if (train_idx.empty() || val_idx.empty() || test_idx.empty())
    throw Error(Errc::empty_dataset, "a fold split has no trials");

  Index fold_pad = 0;
  for (size_t i : train_idx)
    fold_pad = std::max(fold_pad, dataset.samples[i].prepared.valid_length);
  for (size_t i : val_idx)
    fold_pad = std::max(fold_pad, dataset.samples[i].prepared.valid_length);

  auto labeled = [&](const std::vector<size_t>& idx) {
    std::vector<nn::LabeledSeries> out;
    out.reserve(idx.size());
    for (size_t i : idx) {
      const auto& s = dataset.samples[i];
      out.push_back({repad(s.prepared, fold_pad), scale_label(s)});
    }
    return out;
  };

  nn::ModelConfig config = model_config;
  config.input_length = fold_pad;
  const uint64_t fold_seed = derive_seed(options.seed, "fold", static_cast<uint64_t>(fold_index));
  config.seed = fold_seed;

  auto [params, history] = nn::train(config, labeled(train_idx), labeled(val_idx),
                                     derive_seed(fold_seed, "train"));

  FoldOutput out;
  out.summary.fold = fold_index;
  out.summary.best_epoch = history.best_epoch;
  out.summary.best_val_mse = history.best_val_mse;
  out.summary.pad_length = fold_pad;
  out.summary.test_subjects = fold.test_subjects;

  for (size_t k = 0; k < test_idx.size(); ++k) {
    const auto& s = dataset.samples[test_idx[k]];
    EvalRecord rec;
    rec.subject_id = s.subject_id;
    rec.trial_id = s.trial_id;
    rec.true_label = binarize_label(s.valence_raw, s.scale_min, s.scale_max);
    rec.posterior =
        bayes::sample_posterior(repad(s.prepared, fold_pad), params, config, options.n_passes,
                                derive_seed(fold_seed, "posterior", static_cast<uint64_t>(k)));
    if (!options.posterior_dir.empty()) {
      const auto name = "fold" + std::to_string(fold_index) + "_" + s.subject_id + "_" +
                        s.trial_id + ".csv";
      bayes::write_posterior_csv(options.posterior_dir / name, rec.posterior);
    }
    out.uncertainty.push_back(
        {s.subject_id, s.trial_id, rec.true_label, bayes::posterior_variance(rec.posterior)});
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

CvReport run_cross_validation(const data::Dataset& dataset, const nn::ModelConfig& model_config,
                              const CvOptions& options) {
  if (options.n_passes < 2)
    throw Error(Errc::invalid_config, "n_passes must be >= 2 for posterior statistics");
  if (options.workers < 1) throw Error(Errc::invalid_config, "workers must be >= 1");
  if (options.alphas.empty()) throw Error(Errc::invalid_config, "alphas must not be empty");
  if (dataset.samples.empty()) throw Error(Errc::empty_dataset, "dataset has no samples");

  std::vector<std::string> subjects;
  for (const auto& s : dataset.samples) subjects.push_back(s.subject_id);
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

  int k_out = options.k_out;
  if (k_out == 0) k_out = static_cast<int>(subjects.size()) / options.n_folds;

  CvReport report;
  report.plan = make_folds(subjects, k_out, options.n_folds, options.seed,
                           options.n_val_subjects);
  report.dataset_name = dataset.name;
  report.n_samples = dataset.samples.size();
  report.options = options;

  const int n_folds = static_cast<int>(report.plan.folds.size());
  std::vector<FoldOutput> outputs(static_cast<size_t>(n_folds));
  std::vector<std::exception_ptr> failures(static_cast<size_t>(n_folds));

  const int n_threads = std::min(options.workers, n_folds);
  if (n_threads <= 1) {
    for (int f = 0; f < n_folds; ++f) {
      try {
        outputs[static_cast<size_t>(f)] =
            run_fold(dataset, model_config, options, report.plan.folds[static_cast<size_t>(f)], f);
      } catch (...) {
        failures[static_cast<size_t>(f)] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    auto body = [&] {
      while (true) {
        const int f = next.fetch_add(1);
        if (f >= n_folds) return;
        try {
          outputs[static_cast<size_t>(f)] = run_fold(dataset, model_config, options,
                                                     report.plan.folds[static_cast<size_t>(f)], f);
        } catch (...) {
          failures[static_cast<size_t>(f)] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }

  for (int f = 0; f < n_folds; ++f) {
    if (!failures[static_cast<size_t>(f)]) continue;
    const std::string tag = "fold " + std::to_string(f) + ": ";
    try {
      std::rethrow_exception(failures[static_cast<size_t>(f)]);
    } catch (const Error& e) {
      throw Error(e.code(), tag + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(tag + e.what());
    }
  }

  const auto zones = ClassZones::binary();
  std::vector<EvalRecord> pooled;
  for (int f = 0; f < n_folds; ++f) {
    const auto& out = outputs[static_cast<size_t>(f)];
    report.fold_summaries.push_back(out.summary);
    for (const auto& row : out.uncertainty) report.uncertainty.push_back(row);
    for (const auto& rec : out.records) pooled.push_back(rec);
    for (double alpha : options.alphas) {
      const auto m = evaluate_fold(out.records, zones, alpha);
      report.rows.push_back({f, alpha, m.accuracy, m.coverage, m.macro_f1, m.n_committed,
                             m.n_total});
    }
  }

  for (double alpha : options.alphas) {
    AlphaAggregate agg;
    agg.alpha = alpha;
    double acc_sum = 0.0;
    int acc_n = 0;
    double f1_sum = 0.0;
    int f1_n = 0;
    double cov_sum = 0.0;
    int cov_n = 0;
    for (const auto& row : report.rows) {
      if (row.alpha != alpha) continue;
      cov_sum += row.coverage;
      cov_n += 1;
      if (row.accuracy) {
        acc_sum += *row.accuracy;
        acc_n += 1;
      }
      if (row.macro_f1) {
        f1_sum += *row.macro_f1;
        f1_n += 1;
      }
    }
    agg.mean_coverage = cov_sum / static_cast<double>(cov_n);
    if (acc_n > 0) agg.mean_accuracy = acc_sum / static_cast<double>(acc_n);
    if (f1_n > 0) agg.mean_macro_f1 = f1_sum / static_cast<double>(f1_n);

    const auto pooled_m = evaluate_fold(pooled, zones, alpha);
    agg.pooled_accuracy = pooled_m.accuracy;
    agg.pooled_coverage = pooled_m.coverage;
    agg.n_committed = pooled_m.n_committed;
    agg.n_total = pooled_m.n_total;
    report.pooled_confusions.push_back(pooled_m.confusion);
    report.aggregates.push_back(std::move(agg));
  }

  std::vector<double> var_low, var_high;
  for (const auto& row : report.uncertainty) {
    (row.true_class == "high" ? var_high : var_low).push_back(row.posterior_variance);
  }
  report.mwu.n_low = static_cast<long>(var_low.size());
  report.mwu.n_high = static_cast<long>(var_high.size());
  if (!var_low.empty() && !var_high.empty()) {
    const auto res = mann_whitney_u(var_low, var_high);
    report.mwu.defined = true;
    report.mwu.u = res.u;
    report.mwu.p = res.p;
    double mean_low = 0.0, mean_high = 0.0;
    for (double v : var_low) mean_low += v;
    for (double v : var_high) mean_high += v;
    mean_low /= static_cast<double>(var_low.size());
    mean_high /= static_cast<double>(var_high.size());
    report.mwu.mean_var_low = mean_low;
    report.mwu.mean_var_high = mean_high;
    report.mwu.direction = mean_low > mean_high   ? "low>high"
                           : mean_low < mean_high ? "low<high"
                                                  : "low=high";
  }
  return report;
}

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

}  // namespace

std::string report_csv(const std::vector<FoldRow>& rows) {
  std::string out = "fold,alpha,accuracy,coverage,macro_f1,n_committed,n_total\n";
  for (const auto& r : rows) {
    out += std::to_string(r.fold);
    out += ',';
    out += fmt_double(r.alpha);
    out += ',';
    out += opt_field(r.accuracy);
    out += ',';
    out += fmt_double(r.coverage);
    out += ',';
    out += opt_field(r.macro_f1);
    out += ',';
    out += std::to_string(r.n_committed);
    out += ',';
    out += std::to_string(r.n_total);
    out += '\n';
  }
  return out;
}

std::string confusion_csv(const Confusion& confusion) {
  std::string out = "true_label";
  for (const auto& l : confusion.labels) out += ",pred_" + l;
  out += ",abstain\n";
  for (size_t r = 0; r < confusion.labels.size(); ++r) {
    out += confusion.labels[r];
    for (long c : confusion.counts[r]) {
      out += ',';
      out += std::to_string(c);
    }
    out += '\n';
  }
  return out;
}

std::string uncertainty_csv(const std::vector<UncertaintyRow>& rows) {
  std::string out = "subject,trial,true_class,posterior_variance\n";
  for (const auto& r : rows) {
    out += r.subject_id;
    out += ',';
    out += r.trial_id;
    out += ',';
    out += r.true_class;
    out += ',';
    out += fmt_double(r.posterior_variance);
    out += '\n';
  }
  return out;
}

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '+';
    out += ids[i];
  }
  return out;
}

std::string opt_text(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string("none");
}

}  // namespace

std::string summary_text(const CvReport& report) {
  std::string out;
  out += "dataset=" + report.dataset_name + "\n";
  out += "n_samples=" + std::to_string(report.n_samples) + "\n";
  out += "n_folds=" + std::to_string(report.plan.folds.size()) + "\n";
  out += "k_out=" + std::to_string(report.plan.k_out) + "\n";
  out += "seed=" + std::to_string(report.options.seed) + "\n";
  out += "n_passes=" + std::to_string(report.options.n_passes) + "\n";

  for (const auto& fs : report.fold_summaries) {
    out += "fold=" + std::to_string(fs.fold);
    out += " test=" + join_ids(fs.test_subjects);
    out += " pad_length=" + std::to_string(fs.pad_length);
    out += " best_epoch=" + std::to_string(fs.best_epoch);
    out += " best_val_mse=" + fmt_double(fs.best_val_mse);
    out += '\n';
  }

  for (const auto& agg : report.aggregates) {
    out += "alpha=" + fmt_double(agg.alpha);
    out += " mean_accuracy=" + opt_text(agg.mean_accuracy);
    out += " mean_coverage=" + fmt_double(agg.mean_coverage);
    out += " mean_macro_f1=" + opt_text(agg.mean_macro_f1);
    out += " pooled_accuracy=" + opt_text(agg.pooled_accuracy);
    out += " pooled_coverage=" + fmt_double(agg.pooled_coverage);
    out += " n_committed=" + std::to_string(agg.n_committed);
    out += " n_total=" + std::to_string(agg.n_total);
    out += '\n';
  }

  if (report.mwu.defined) {
    out += "mann_whitney u=" + fmt_double(report.mwu.u);
    out += " p=" + fmt_double(report.mwu.p);
    out += " direction=" + report.mwu.direction;
    out += " n_low=" + std::to_string(report.mwu.n_low);
    out += " n_high=" + std::to_string(report.mwu.n_high);
    out += " mean_var_low=" + fmt_double(report.mwu.mean_var_low);
    out += " mean_var_high=" + fmt_double(report.mwu.mean_var_high);
    out += '\n';
  } else {
    out += "mann_whitney undefined (needs both classes in the test pool)\n";
  }
  return out;
}

void write_cv_outputs(const std::filesystem::path& out_dir, const CvReport& report) {
  write_text_file(out_dir / "report.csv", report_csv(report.rows));
  for (size_t i = 0; i < report.options.alphas.size(); ++i) {
    const auto name = "confusion_" + fmt_double(report.options.alphas[i]) + ".csv";
    write_text_file(out_dir / name, confusion_csv(report.pooled_confusions[i]));
  }
  write_text_file(out_dir / "uncertainty.csv", uncertainty_csv(report.uncertainty));
  write_text_file(out_dir / "summary.txt", summary_text(report));
}

}  // namespace heartval::eval
