#include "heartval/nn/kernels.hpp"

#include <cmath>

#include "heartval/error.hpp"
#include "heartval/rng.hpp"

namespace heartval::nn {

Mat im2col(const Mat& x, int window) {
  const Index channels = x.rows();
  const Index time = x.cols();
  const Index pad_left = (window - 1) / 2;
  Mat patches = Mat::Zero(channels * window, time);
  for (Index c = 0; c < channels; ++c) {
    for (int k = 0; k < window; ++k) {
      const Index row = c * window + k;
      for (Index t = 0; t < time; ++t) {
        const Index src = t + k - pad_left;
        if (src >= 0 && src < time) patches(row, t) = x(c, src);
      }
    }
  }
  return patches;
}

Mat conv1d_forward(const Mat& x, const ConvLayerParams& layer) {
  if (x.rows() != layer.in_channels)
    throw Error(Errc::shape_mismatch, "conv input has " + std::to_string(x.rows()) +
                                          " channels, layer expects " +
                                          std::to_string(layer.in_channels));
  const Mat patches = im2col(x, layer.window);
  Mat y = layer.weight * patches;
  y.colwise() += layer.bias;
  return y;
}

void conv1d_backward(const Mat& d_out, const Mat& patches, const ConvLayerParams& layer,
                     Mat& d_weight, Vec& d_bias, Mat* d_input) {
  d_bias += d_out.rowwise().sum();
  d_weight.noalias() += d_out * patches.transpose();
  if (!d_input) return;

  const Mat d_patches = layer.weight.transpose() * d_out;
  const Index time = d_out.cols();
  const Index pad_left = (layer.window - 1) / 2;
  for (Index c = 0; c < layer.in_channels; ++c) {
    for (int k = 0; k < layer.window; ++k) {
      const Index row = c * layer.window + k;
      for (Index t = 0; t < time; ++t) {
        const Index src = t + k - pad_left;
        if (src >= 0 && src < time) (*d_input)(c, src) += d_patches(row, t);
      }
    }
  }
}

Mat relu(const Mat& x) { return x.cwiseMax(0.0); }
Vec relu(const Vec& x) { return x.cwiseMax(0.0); }

Mat relu_backward(const Mat& d_out, const Mat& pre) {
  return (pre.array() > 0.0).select(d_out, Mat::Zero(d_out.rows(), d_out.cols()));
}

Vec global_avg_pool(const Mat& x) {
  if (x.cols() < 1) throw Error(Errc::shape_mismatch, "pooling needs at least one time step");
  return x.rowwise().mean();
}

DropoutMask make_dropout_mask(double rate, uint64_t rng_seed, Index n) {
  if (rate < 0.0 || rate >= 1.0) throw Error(Errc::invalid_config, "dropout rate must be in [0, 1)");
  DropoutMask mask;
  mask.rate = rate;
  mask.rng_seed = rng_seed;
  mask.keep_flags.resize(static_cast<size_t>(n));
  Rng rng(rng_seed);
  for (auto& flag : mask.keep_flags) flag = rate == 0.0 || rng.uniform01() >= rate;
  return mask;
}

namespace {

template <typename T>
T dropout_scale_impl(const T& x, const DropoutMask& mask) {
  if (mask.empty() && mask.rate == 0.0) return x;  // default mask = identity
  if (static_cast<Index>(mask.keep_flags.size()) != x.size())
    throw Error(Errc::shape_mismatch, "dropout mask size " + std::to_string(mask.keep_flags.size()) +
                                          " vs tensor size " + std::to_string(x.size()));
  if (mask.rate == 0.0) return x;
  T out = x;
  const double scale = mask.keep_scale();
  double* data = out.data();
  for (Index k = 0; k < out.size(); ++k) data[k] = mask.keep_flags[static_cast<size_t>(k)] ? data[k] * scale : 0.0;
  return out;
}

}  // namespace

Mat dropout_apply(const Mat& x, const DropoutMask& mask) { return dropout_scale_impl(x, mask); }
Vec dropout_apply(const Vec& x, const DropoutMask& mask) { return dropout_scale_impl(x, mask); }

// The dropout map is linear, so the backward pass applies the same mask.
Mat dropout_backward(const Mat& d_out, const DropoutMask& mask) {
  return dropout_scale_impl(d_out, mask);
}
Vec dropout_backward(const Vec& d_out, const DropoutMask& mask) {
  return dropout_scale_impl(d_out, mask);
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Vec lstm_dir_forward(const Mat& x_seq, const LstmDirParams& params, LstmDirCache* cache) {
  const Index features = x_seq.rows();
  const Index time = x_seq.cols();
  const Index hidden = params.w_recur.cols();
  if (params.w_input.cols() != features)
    throw Error(Errc::shape_mismatch, "lstm expects " + std::to_string(params.w_input.cols()) +
                                          " features, got " + std::to_string(features));
  if (params.w_input.rows() != 4 * hidden || params.w_recur.rows() != 4 * hidden ||
      params.bias.size() != 4 * hidden)
    throw Error(Errc::shape_mismatch, "lstm gate blocks disagree with hidden size");

  if (cache) {
    cache->x = x_seq;
    cache->i.resize(hidden, time);
    cache->f.resize(hidden, time);
    cache->g.resize(hidden, time);
    cache->o.resize(hidden, time);
    cache->c.resize(hidden, time);
    cache->tanh_c.resize(hidden, time);
    cache->h.resize(hidden, time);
  }

  Vec h = Vec::Zero(hidden);
  Vec c = Vec::Zero(hidden);
  Vec z(4 * hidden);
  for (Index t = 0; t < time; ++t) {
    z.noalias() = params.w_input * x_seq.col(t);
    z.noalias() += params.w_recur * h;
    z += params.bias;

    Vec i(hidden), f(hidden), g(hidden), o(hidden);
    for (Index j = 0; j < hidden; ++j) {
      i[j] = sigmoid(z[j]);
      f[j] = sigmoid(z[hidden + j]);
      g[j] = std::tanh(z[2 * hidden + j]);
      o[j] = sigmoid(z[3 * hidden + j]);
    }
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    const Vec tanh_c = c.array().tanh();
    h = o.cwiseProduct(tanh_c);

    if (!h.allFinite() || !c.allFinite())
      throw Error(Errc::non_finite_activation, "lstm state diverged at step " + std::to_string(t));

    if (cache) {
      cache->i.col(t) = i;
      cache->f.col(t) = f;
      cache->g.col(t) = g;
      cache->o.col(t) = o;
      cache->c.col(t) = c;
      cache->tanh_c.col(t) = tanh_c;
      cache->h.col(t) = h;
    }
  }
  return h;
}

void lstm_dir_backward(const Vec& d_h_final, const LstmDirParams& params,
                       const LstmDirCache& cache, LstmDirParams& grad) {
  const Index hidden = params.w_recur.cols();
  const Index time = cache.x.cols();
  if (d_h_final.size() != hidden || cache.h.rows() != hidden || cache.h.cols() != time)
    throw Error(Errc::stale_cache, "lstm cache does not match parameters");

  Vec d_h = d_h_final;
  Vec d_c = Vec::Zero(hidden);
  Vec d_z(4 * hidden);
  for (Index t = time - 1; t >= 0; --t) {
    const auto i = cache.i.col(t);
    const auto f = cache.f.col(t);
    const auto g = cache.g.col(t);
    const auto o = cache.o.col(t);
    const auto tanh_c = cache.tanh_c.col(t);

    const Vec d_o = d_h.cwiseProduct(tanh_c);
    d_c.array() += d_h.array() * o.array() * (1.0 - tanh_c.array().square());

    const Vec d_i = d_c.cwiseProduct(g);
    const Vec d_g = d_c.cwiseProduct(i);
    Vec c_prev = t > 0 ? Vec(cache.c.col(t - 1)) : Vec(Vec::Zero(hidden));
    const Vec d_f = d_c.cwiseProduct(c_prev);

    d_z.segment(0, hidden) = d_i.array() * i.array() * (1.0 - i.array());
    d_z.segment(hidden, hidden) = d_f.array() * f.array() * (1.0 - f.array());
    d_z.segment(2 * hidden, hidden) = d_g.array() * (1.0 - g.array().square());
    d_z.segment(3 * hidden, hidden) = d_o.array() * o.array() * (1.0 - o.array());

    grad.w_input.noalias() += d_z * cache.x.col(t).transpose();
    if (t > 0) grad.w_recur.noalias() += d_z * cache.h.col(t - 1).transpose();
    grad.bias += d_z;

    d_h.noalias() = params.w_recur.transpose() * d_z;
    d_c = d_c.cwiseProduct(f);
  }
}

Vec bilstm_forward(const Mat& x_seq, const LstmDirParams& fwd, const LstmDirParams& bwd,
                   LstmDirCache* cache_fwd, LstmDirCache* cache_bwd) {
  const Vec h_fwd = lstm_dir_forward(x_seq, fwd, cache_fwd);
  const Mat reversed = x_seq.rowwise().reverse();
  const Vec h_bwd = lstm_dir_forward(reversed, bwd, cache_bwd);
  Vec out(h_fwd.size() + h_bwd.size());
  out << h_fwd, h_bwd;
  return out;
}

}  // namespace heartval::nn
