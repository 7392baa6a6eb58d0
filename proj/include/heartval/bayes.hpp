#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "heartval/nn/model.hpp"

namespace heartval::bayes {

using nn::ModelConfig;
using nn::ModelParams;

// Empirical distribution over the model output, one draw per dropout pass.
struct ValencePosterior {
  Vec samples;
  int n_passes = 0;
};

// Ordered partition of the output line into labeled zones. A value equal to a
// boundary belongs to the zone below it.
struct ClassZones {
  std::vector<double> boundaries;  // strictly increasing, size K-1
  std::vector<std::string> labels; // size K

  static ClassZones binary(double boundary = 0.5) {
    return {{boundary}, {"low", "high"}};
  }

  size_t zone_count() const { return labels.size(); }
  size_t zone_of(double v) const;
};

struct Decision {
  bool committed = false;
  std::string label;           // empty when abstaining
  size_t zone = 0;             // meaningful only when committed
  double covered_fraction = 0; // largest zone mass
  double alpha = 0.0;
};

// n_passes dropout-on forward passes over the padded series; pass i is seeded
// from (seed, i), so the sequence is reproducible and independent of
// evaluation order.
ValencePosterior sample_posterior(const Vec& x, const ModelParams& params,
                                  const ModelConfig& config, int n_passes, uint64_t seed);

// Commits to the zone holding the largest sample mass when that mass reaches
// alpha, otherwise abstains. An exact tie between maximal zones goes to the
// zone containing the sample mean (so binary alpha = 0.5 never abstains).
Decision classify(const ValencePosterior& posterior, const ClassZones& zones, double alpha);

// Population variance of the samples.
double posterior_variance(const ValencePosterior& posterior);

std::string posterior_csv(const ValencePosterior& posterior);
void write_posterior_csv(const std::filesystem::path& path, const ValencePosterior& posterior);

}  // namespace heartval::bayes
