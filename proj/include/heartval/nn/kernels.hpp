#pragma once

#include <cstdint>
#include <vector>

#include "heartval/nn/params.hpp"
#include "heartval/types.hpp"

namespace heartval::nn {

// --- convolution ------------------------------------------------------------

// Patch matrix for stride-1 "same" cross-correlation: column t holds the
// receptive field of output position t, channel-major, zero outside the
// input. Left pad is (window - 1) / 2, the remainder pads the right.
Mat im2col(const Mat& x, int window);

// y(f, t) = sum_{c,k} w(f, c*W+k) * x(c, t+k-pad) + b(f). Output time length
// equals input time length. Throws ShapeMismatch on a channel-count mismatch.
Mat conv1d_forward(const Mat& x, const ConvLayerParams& layer);

// Gradient of conv1d_forward. `patches` is the cached im2col of the layer
// input. d_input is filled only when it is non-null (the first layer's input
// is data, not parameters).
void conv1d_backward(const Mat& d_out, const Mat& patches, const ConvLayerParams& layer,
                     Mat& d_weight, Vec& d_bias, Mat* d_input);

// --- elementwise ------------------------------------------------------------

Mat relu(const Mat& x);
Vec relu(const Vec& x);

// d_pre = d_out where pre > 0, else 0.
Mat relu_backward(const Mat& d_out, const Mat& pre);

// Per-filter mean over the full (padded) time axis.
Vec global_avg_pool(const Mat& x);

// --- dropout ----------------------------------------------------------------

// Inverted dropout: kept entries are scaled by 1/(1-rate) so the expectation
// matches the identity path. keep_flags are indexed in the tensor's storage
// order. rate 0 keeps everything.
struct DropoutMask {
  std::vector<uint8_t> keep_flags;
  double rate = 0.0;
  uint64_t rng_seed = 0;

  bool empty() const { return keep_flags.empty(); }
  double keep_scale() const { return rate > 0.0 ? 1.0 / (1.0 - rate) : 1.0; }
};

DropoutMask make_dropout_mask(double rate, uint64_t rng_seed, Index n);

Mat dropout_apply(const Mat& x, const DropoutMask& mask);
Vec dropout_apply(const Vec& x, const DropoutMask& mask);

Mat dropout_backward(const Mat& d_out, const DropoutMask& mask);
Vec dropout_backward(const Vec& d_out, const DropoutMask& mask);

// --- LSTM -------------------------------------------------------------------

// Everything one direction needs for backpropagation through time. x holds
// the inputs in the order consumed (already reversed for the backward
// direction).
struct LstmDirCache {
  Mat x;       // features x time
  Mat i, f, g, o;  // gate activations, hidden x time
  Mat c, tanh_c, h;
};

// Runs the recurrence over the columns of x_seq and returns the final hidden
// state. Gates use the logistic sigmoid, the cell candidate and output squash
// use tanh. Throws ShapeMismatch / NonFiniteActivation.
Vec lstm_dir_forward(const Mat& x_seq, const LstmDirParams& params, LstmDirCache* cache);

// Backpropagates d(final hidden state) through the full sequence,
// accumulating into the gradient tensors (which must be pre-sized).
void lstm_dir_backward(const Vec& d_h_final, const LstmDirParams& params,
                       const LstmDirCache& cache, LstmDirParams& grad);

// Concatenated final hidden states of the forward pass over x_seq and an
// independent pass over the time-reversed sequence: [h_fwd(T), h_bwd(1)].
Vec bilstm_forward(const Mat& x_seq, const LstmDirParams& fwd, const LstmDirParams& bwd,
                   LstmDirCache* cache_fwd, LstmDirCache* cache_bwd);

}  // namespace heartval::nn
