#include "heartval/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heartval/error.hpp"
#include "heartval/rng.hpp"

namespace heartval::nn {

double mse_loss(const std::vector<double>& predictions, const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw Error(Errc::length_mismatch, "mse over " + std::to_string(predictions.size()) +
                                           " predictions, " + std::to_string(targets.size()) +
                                           " targets");
  double acc = 0.0;
  for (size_t k = 0; k < predictions.size(); ++k) {
    const double d = predictions[k] - targets[k];
    acc += d * d;
  }
  return acc / static_cast<double>(predictions.size());
}

std::vector<double> mse_grad(const std::vector<double>& predictions,
                             const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw Error(Errc::length_mismatch, "mse gradient length mismatch");
  const double inv_n = 1.0 / static_cast<double>(predictions.size());
  std::vector<double> g(predictions.size());
  for (size_t k = 0; k < predictions.size(); ++k)
    g[k] = 2.0 * (predictions[k] - targets[k]) * inv_n;
  return g;
}

AdamState make_adam_state(const ModelParams& like) {
  AdamState s;
  s.m = zeros_like(like);
  s.v = zeros_like(like);
  s.step = 0;
  return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate) {
  if (!same_shape(params, grads) || !same_shape(params, state.m))
    throw Error(Errc::shape_mismatch, "adam state does not match parameters");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(kAdamBeta1, t);
  const double corr2 = 1.0 - std::pow(kAdamBeta2, t);

  auto vp = tensor_views(params);
  auto vg = tensor_views(const_cast<ModelParams&>(grads));
  auto vm = tensor_views(state.m);
  auto vv = tensor_views(state.v);
  for (size_t i = 0; i < vp.size(); ++i) {
    double* p = vp[i].data;
    const double* g = vg[i].data;
    double* m = vm[i].data;
    double* v = vv[i].data;
    for (Index k = 0; k < vp[i].size; ++k) {
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g[k];
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * g[k] * g[k];
      const double m_hat = m[k] / corr1;
      const double v_hat = v[k] / corr2;
      p[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
  }
}

double evaluate_mse(const ModelParams& params, const ModelConfig& config,
                    const std::vector<LabeledSeries>& set) {
  if (set.empty()) throw Error(Errc::empty_dataset, "evaluation set is empty");
  double acc = 0.0;
  for (const auto& s : set) {
    const double pred = model_forward(s.x, params, config, false, 0);
    const double d = pred - s.y;
    acc += d * d;
  }
  return acc / static_cast<double>(set.size());
}

std::pair<ModelParams, TrainHistory> train(const ModelConfig& config,
                                           const std::vector<LabeledSeries>& train_set,
                                           const std::vector<LabeledSeries>& val_set,
                                           uint64_t seed) {
  validate(config, true);
  if (train_set.empty() || val_set.empty())
    throw Error(Errc::empty_dataset, "training needs non-empty train and validation sets");
  for (const auto& s : train_set)
    if (s.x.size() != config.input_length)
      throw Error(Errc::shape_mismatch, "training sample length " + std::to_string(s.x.size()));

  ModelParams params = init_model_params(config, derive_seed(seed, "init"));
  AdamState adam = make_adam_state(params);

  ModelParams best_params = params;
  TrainHistory history;
  history.best_val_mse = std::numeric_limits<double>::infinity();

  double lr = config.lr_initial;
  int epochs_since_best = 0;
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(seed, "epoch", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double train_sq_sum = 0.0;
    const size_t n = order.size();
    for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(n, start + static_cast<size_t>(config.batch_size));
      const size_t bs = end - start;

      ModelParams batch_grad = zeros_like(params);
      for (size_t k = start; k < end; ++k) {
        const auto& s = train_set[order[k]];
        const uint64_t pass_seed =
            derive_seed(derive_seed(seed, "epoch", static_cast<uint64_t>(epoch)), "sample",
                        static_cast<uint64_t>(order[k]));
        ModelCache cache;
        const double pred = model_forward(s.x, params, config, true, pass_seed, &cache);
        const double err = pred - s.y;
        train_sq_sum += err * err;
        const double d_y = 2.0 * err / static_cast<double>(bs);
        axpy(batch_grad, model_backward(cache, params, config, d_y));
      }
      adam_step(params, batch_grad, adam, lr);
    }

    const double train_mse = train_sq_sum / static_cast<double>(n);
    const double val_mse = evaluate_mse(params, config, val_set);
    if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
      throw Error(Errc::non_finite_loss, "epoch " + std::to_string(epoch));
    history.epochs.push_back({train_mse, val_mse, lr});

    if (val_mse < history.best_val_mse) {
      history.best_val_mse = val_mse;
      history.best_epoch = epoch;
      best_params = params;
      epochs_since_best = 0;
    } else {
      epochs_since_best += 1;
      if (epochs_since_best >= config.lr_patience_epochs && lr > config.lr_floor) {
        lr = std::max(lr * 0.5, config.lr_floor);
        epochs_since_best = 0;
      }
    }
  }
  return {std::move(best_params), std::move(history)};
}

}  // namespace heartval::nn
