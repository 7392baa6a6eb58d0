#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heartval/nn/model.hpp"

namespace heartval::nn {

// One training example: a padded, z-scored series and its [0,1]-scaled label.
struct LabeledSeries {
  Vec x;
  double y = 0.0;
};

double mse_loss(const std::vector<double>& predictions, const std::vector<double>& targets);

// d(mse)/d(prediction_k) = 2 (pred_k - target_k) / n.
std::vector<double> mse_grad(const std::vector<double>& predictions,
                             const std::vector<double>& targets);

// First and second moment estimates, one slot per parameter tensor.
struct AdamState {
  ModelParams m;
  ModelParams v;
  long step = 0;
};

AdamState make_adam_state(const ModelParams& like);

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// One bias-corrected Adam update. state.step must already count this step
// (call with step = 1 for the first update).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate);

struct EpochStats {
  double train_mse = 0.0;
  double val_mse = 0.0;
  double learning_rate = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based epoch index of the checkpoint
  double best_val_mse = 0.0;
};

// Full training run: per-epoch reshuffle, mini-batch Adam on mean-MSE
// gradients, validation MSE with dropout off after every epoch, learning rate
// halved (never below lr_floor) after lr_patience_epochs epochs without a new
// best, and the returned parameters are the best-validation snapshot.
// Reproducible from (config, data, seed).
std::pair<ModelParams, TrainHistory> train(const ModelConfig& config,
                                           const std::vector<LabeledSeries>& train_set,
                                           const std::vector<LabeledSeries>& val_set,
                                           uint64_t seed);

// Mean MSE of dropout-off predictions over a set.
double evaluate_mse(const ModelParams& params, const ModelConfig& config,
                    const std::vector<LabeledSeries>& set);

}  // namespace heartval::nn
