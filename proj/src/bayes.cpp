#include "heartval/bayes.hpp"

#include <algorithm>

#include "heartval/error.hpp"
#include "heartval/io_util.hpp"
#include "heartval/rng.hpp"

namespace heartval::bayes {

size_t ClassZones::zone_of(double v) const {
  size_t z = 0;
  while (z < boundaries.size() && v > boundaries[z]) ++z;
  return z;
}

ValencePosterior sample_posterior(const Vec& x, const ModelParams& params,
                                  const ModelConfig& config, int n_passes, uint64_t seed) {
  if (n_passes < 1) throw Error(Errc::invalid_config, "n_passes must be >= 1");
  ValencePosterior post;
  post.n_passes = n_passes;
  post.samples.resize(n_passes);
  for (int i = 0; i < n_passes; ++i) {
    post.samples[i] = nn::model_forward(x, params, config, true,
                                        derive_seed(seed, "pass", static_cast<uint64_t>(i)));
  }
  return post;
}

Decision classify(const ValencePosterior& posterior, const ClassZones& zones, double alpha) {
  if (alpha < 0.5 || alpha > 1.0)
    throw Error(Errc::invalid_alpha, "alpha " + fmt_double(alpha) + " outside [0.5, 1]");
  if (posterior.samples.size() < 1) throw Error(Errc::empty_posterior, "no samples");
  if (zones.labels.size() != zones.boundaries.size() + 1 || zones.labels.size() < 2)
    throw Error(Errc::invalid_config, "zones need K labels and K-1 boundaries, K >= 2");

  const Index n = posterior.samples.size();
  std::vector<Index> counts(zones.zone_count(), 0);
  for (Index k = 0; k < n; ++k) counts[zones.zone_of(posterior.samples[k])] += 1;

  const auto max_it = std::max_element(counts.begin(), counts.end());
  const Index max_count = *max_it;
  size_t best = static_cast<size_t>(max_it - counts.begin());
  if (std::count(counts.begin(), counts.end(), max_count) > 1) {
    // Exact tie: prefer the zone holding the sample mean when it is among the
    // tied maxima.
    const size_t mean_zone = zones.zone_of(posterior.samples.mean());
    if (counts[mean_zone] == max_count) best = mean_zone;
  }

  Decision d;
  d.alpha = alpha;
  d.covered_fraction = static_cast<double>(max_count) / static_cast<double>(n);
  // Slack of 1e-12 makes a mass exactly at a decimal alpha commit even though
  // the nearest double to that alpha may sit fractionally above the rational
  // count/n. Masses are spaced 1/n apart, so no other case can flip.
  if (d.covered_fraction >= alpha - 1e-12) {
    d.committed = true;
    d.zone = best;
    d.label = zones.labels[best];
  }
  return d;
}

double posterior_variance(const ValencePosterior& posterior) {
  const Index n = posterior.samples.size();
  if (n < 2) throw Error(Errc::too_few_samples, "variance needs at least 2 samples");
  // A point mass must report exactly 0, not the rounding residue of mean().
  if ((posterior.samples.array() == posterior.samples[0]).all()) return 0.0;
  const double mean = posterior.samples.mean();
  return (posterior.samples.array() - mean).square().sum() / static_cast<double>(n);
}

std::string posterior_csv(const ValencePosterior& posterior) {
  std::string out = "pass_index,y_hat\n";
  for (Index i = 0; i < posterior.samples.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += fmt_double(posterior.samples[i]);
    out += '\n';
  }
  return out;
}

void write_posterior_csv(const std::filesystem::path& path, const ValencePosterior& posterior) {
  write_text_file(path, posterior_csv(posterior));
}

}  // namespace heartval::bayes
