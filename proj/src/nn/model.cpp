#include "heartval/nn/model.hpp"

#include <cmath>
#include <string>

#include "heartval/error.hpp"
#include "heartval/rng.hpp"

namespace heartval::nn {

namespace {

void check_params_match(const ModelParams& params, const ModelConfig& config) {
  if (params.conv.size() != config.conv_windows.size()) {
    throw Error(Errc::shape_mismatch, "conv layer count does not match config");
  }
  for (size_t l = 0; l < params.conv.size(); ++l) {
    const auto& cl = params.conv[l];
    const Index in_ch = l == 0 ? 1 : config.conv_filters;
    if (cl.in_channels != in_ch || cl.window != config.conv_windows[l] ||
        cl.weight.rows() != config.conv_filters ||
        cl.weight.cols() != in_ch * config.conv_windows[l]) {
      throw Error(Errc::shape_mismatch, "conv layer " + std::to_string(l) + " shape");
    }
  }
  const Index h = config.lstm_hidden_units;
  for (const auto* dir : {&params.lstm_fwd, &params.lstm_bwd}) {
    if (dir->w_input.rows() != 4 * h || dir->w_input.cols() != 1 ||
        dir->w_recur.rows() != 4 * h || dir->w_recur.cols() != h ||
        dir->bias.size() != 4 * h) {
      throw Error(Errc::shape_mismatch, "lstm direction shape");
    }
  }
  if (params.dense.weight.size() != config.concat_width()) {
    throw Error(Errc::shape_mismatch, "dense weight width");
  }
}

}  // namespace

double model_forward(const Vec& x, const ModelParams& params, const ModelConfig& config,
                     bool dropout_on, uint64_t rng_seed, ModelCache* cache) {
  if (config.input_length > 0 && x.size() != config.input_length) {
    throw Error(Errc::shape_mismatch,
                "input length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(config.input_length));
  }
  if (x.size() < 1) throw Error(Errc::shape_mismatch, "empty input");
  check_params_match(params, config);

  ModelCache local;
  ModelCache& c = cache ? *cache : local;
  c = ModelCache{};
  c.dropout_on = dropout_on;

  const Mat series = x.transpose();  // 1 x T, shared by both streams

  Mat act = series;
  for (size_t l = 0; l < params.conv.size(); ++l) {
    const auto& layer = params.conv[l];
    c.conv_inputs.push_back(act);
    Mat patches = im2col(act, layer.window);
    Mat pre = layer.weight * patches;
    pre.colwise() += layer.bias;
    c.conv_patches.push_back(std::move(patches));

    DropoutMask mask;
    if (dropout_on && config.conv_dropout_rate > 0.0) {
      mask = make_dropout_mask(config.conv_dropout_rate,
                               derive_seed(rng_seed, "dropout.conv", l), pre.size());
    }
    Mat dropped = dropout_apply(pre, mask);
    c.conv_masks.push_back(std::move(mask));
    act = relu(dropped);
    c.conv_dropped.push_back(std::move(dropped));
  }
  c.conv_final = act;
  c.pooled = global_avg_pool(act);

  c.lstm_concat =
      bilstm_forward(series, params.lstm_fwd, params.lstm_bwd, &c.lstm_fwd, &c.lstm_bwd);
  if (dropout_on && config.lstm_dropout_rate > 0.0) {
    c.lstm_mask = make_dropout_mask(config.lstm_dropout_rate,
                                    derive_seed(rng_seed, "dropout.lstm"),
                                    c.lstm_concat.size());
  } else {
    c.lstm_mask = DropoutMask{};
  }
  c.lstm_out = dropout_apply(c.lstm_concat, c.lstm_mask);

  c.concat.resize(c.pooled.size() + c.lstm_out.size());
  c.concat << c.pooled, c.lstm_out;
  c.y_hat = params.dense.weight.dot(c.concat) + params.dense.bias(0);
  if (!std::isfinite(c.y_hat)) {
    throw Error(Errc::non_finite_activation, "dense output");
  }
  return c.y_hat;
}

ModelParams model_backward(const ModelCache& cache, const ModelParams& params,
                           const ModelConfig& config, double d_y) {
  check_params_match(params, config);
  if (cache.concat.size() != params.dense.weight.size()) {
    throw Error(Errc::stale_cache, "cache concat width does not match parameters");
  }
  if (cache.conv_inputs.size() != params.conv.size()) {
    throw Error(Errc::stale_cache, "cache conv depth does not match parameters");
  }

  ModelParams grad = zeros_like(params);
  grad.dense.weight = d_y * cache.concat;
  grad.dense.bias(0) = d_y;

  const Vec d_concat = d_y * params.dense.weight;
  const Index pool_n = cache.pooled.size();
  const Vec d_pooled = d_concat.head(pool_n);
  const Vec d_lstm_out = d_concat.tail(d_concat.size() - pool_n);

  // LSTM stream. Its input is the raw series, so no gradient flows onward.
  const Vec d_lstm_concat = dropout_backward(d_lstm_out, cache.lstm_mask);
  const Index h = config.lstm_hidden_units;
  lstm_dir_backward(d_lstm_concat.head(h), params.lstm_fwd, cache.lstm_fwd, grad.lstm_fwd);
  lstm_dir_backward(d_lstm_concat.tail(h), params.lstm_bwd, cache.lstm_bwd, grad.lstm_bwd);

  // Conv stream: the pool spreads its gradient evenly over time.
  const Index time = cache.conv_final.cols();
  Mat d_act = (d_pooled / static_cast<double>(time)).replicate(1, time);
  for (size_t l = params.conv.size(); l-- > 0;) {
    const Mat d_dropped = relu_backward(d_act, cache.conv_dropped[l]);
    const Mat d_pre = dropout_backward(d_dropped, cache.conv_masks[l]);
    Mat d_input;
    if (l > 0) d_input = Mat::Zero(cache.conv_inputs[l].rows(), cache.conv_inputs[l].cols());
    conv1d_backward(d_pre, cache.conv_patches[l], params.conv[l], grad.conv[l].weight,
                    grad.conv[l].bias, l > 0 ? &d_input : nullptr);
    if (l > 0) d_act = std::move(d_input);
  }
  return grad;
}

}  // namespace heartval::nn
