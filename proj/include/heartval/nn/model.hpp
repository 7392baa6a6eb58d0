#pragma once

#include <cstdint>
#include <vector>

#include "heartval/nn/kernels.hpp"
#include "heartval/nn/params.hpp"

namespace heartval::nn {

// Intermediates of one forward pass, retained for backpropagation. Dropout
// masks are kept so the backward pass replays the exact stochastic network.
struct ModelCache {
  std::vector<Mat> conv_inputs;   // input of each conv layer (channels x time)
  std::vector<Mat> conv_patches;  // im2col of that input
  std::vector<Mat> conv_dropped;  // post-dropout, pre-ReLU activations
  std::vector<DropoutMask> conv_masks;
  Mat conv_final;  // output of the last ReLU
  Vec pooled;

  LstmDirCache lstm_fwd;
  LstmDirCache lstm_bwd;
  Vec lstm_concat;
  DropoutMask lstm_mask;
  Vec lstm_out;

  Vec concat;  // dense input
  double y_hat = 0.0;
  bool dropout_on = false;
};

// Runs the dual-stream network on one padded series: the conv stack with
// dropout and ReLU into a global average pool, a bidirectional LSTM with
// dropout, then a dense readout of the concatenated streams. When dropout_on
// is false every dropout site is the identity; when on, masks derive from
// rng_seed. Fills `cache` when non-null.
double model_forward(const Vec& x, const ModelParams& params, const ModelConfig& config,
                     bool dropout_on, uint64_t rng_seed, ModelCache* cache = nullptr);

// Exact gradients of d_y * y_hat with respect to every parameter, replaying
// the masks recorded in the cache. Throws StaleCache when the cache and
// parameters disagree.
ModelParams model_backward(const ModelCache& cache, const ModelParams& params,
                           const ModelConfig& config, double d_y);

}  // namespace heartval::nn
