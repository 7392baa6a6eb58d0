#pragma once

#include <string>
#include <vector>

#include "heartval/nn/config.hpp"
#include "heartval/types.hpp"

namespace heartval::nn {

// One 1-D convolution layer. Row f of `weight` is filter f's kernel laid out
// channel-major: entry (f, c * window + k) multiplies input channel c at tap k.
struct ConvLayerParams {
  Mat weight;  // filters x (in_channels * window)
  Vec bias;    // filters
  int in_channels = 1;
  int window = 1;
};

// One LSTM direction. Gate blocks are stacked input/forget/cell/output, each
// of height H, in w_input (4H x F), w_recur (4H x H) and bias (4H).
struct LstmDirParams {
  Mat w_input;
  Mat w_recur;
  Vec bias;
};

struct DenseParams {
  Vec weight;  // concat width
  Vec bias;    // size 1
};

struct ModelParams {
  std::vector<ConvLayerParams> conv;
  LstmDirParams lstm_fwd;
  LstmDirParams lstm_bwd;
  DenseParams dense;
};

// Named view into one parameter tensor; the backing storage lives in
// ModelParams. Views are listed in a fixed order that also defines the
// serialization layout.
struct TensorView {
  std::string name;
  std::vector<Index> shape;
  double* data;
  Index size;
};

std::vector<TensorView> tensor_views(ModelParams& params);
Index parameter_count(const ModelParams& params);

// Same layout as `like`, all values zero.
ModelParams zeros_like(const ModelParams& like);

bool same_shape(const ModelParams& a, const ModelParams& b);

// y += x, elementwise over every tensor. Throws ShapeMismatch.
void axpy(ModelParams& y, const ModelParams& x, double scale = 1.0);

// All-zero parameters with the shapes the config dictates.
ModelParams make_params(const ModelConfig& config);

// Weights drawn from N(0, sqrt(2 / fan_in)), biases exactly zero,
// reproducible from the seed. fan_in is the tensor's input width.
ModelParams he_normal_init(const ModelConfig& config, uint64_t seed);

// he_normal_init plus the LSTM forget-gate biases set to 1 — the
// initialization the training loop uses.
ModelParams init_model_params(const ModelConfig& config, uint64_t seed);

}  // namespace heartval::nn
