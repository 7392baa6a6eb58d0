#pragma once

#include <cstdint>
#include <vector>

#include "heartval/types.hpp"

namespace heartval::nn {

// Architecture and training hyperparameters. Defaults are the production
// model; tests shrink them freely.
struct ModelConfig {
  std::vector<int> conv_windows = {8, 6, 4, 2};  // one conv layer per entry
  int conv_filters = 128;                        // per layer
  double conv_dropout_rate = 0.5;
  int lstm_hidden_units = 32;  // per direction
  double lstm_dropout_rate = 0.8;
  int dense_output_dim = 1;

  int epochs = 1500;
  double lr_initial = 1e-3;
  double lr_floor = 1e-4;
  int lr_patience_epochs = 100;
  int batch_size = 16;
  uint64_t seed = 42;

  double scale_min = 1.0;  // raw label scale, mapped onto [0, 1]
  double scale_max = 9.0;

  Index input_length = 0;  // padded series length the model accepts

  int concat_width() const { return conv_filters + 2 * lstm_hidden_units; }
};

// Throws InvalidConfig on out-of-range fields. input_length is only checked
// when require_input_length is set (it is unknown until a dataset is padded).
void validate(const ModelConfig& config, bool require_input_length = false);

}  // namespace heartval::nn
