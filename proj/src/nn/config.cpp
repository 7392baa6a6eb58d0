#include "heartval/nn/config.hpp"

#include <string>

#include "heartval/error.hpp"

namespace heartval::nn {

void validate(const ModelConfig& c, bool require_input_length) {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_config, msg); };

  if (c.conv_windows.empty()) fail("conv_windows must not be empty");
  for (size_t i = 0; i < c.conv_windows.size(); ++i) {
    if (c.conv_windows[i] < 1) fail("conv window must be >= 1");
    if (i > 0 && c.conv_windows[i] >= c.conv_windows[i - 1])
      fail("conv windows must be strictly decreasing");
  }
  if (c.conv_filters < 1) fail("conv_filters must be >= 1");
  if (c.conv_dropout_rate < 0.0 || c.conv_dropout_rate >= 1.0)
    fail("conv_dropout_rate must be in [0, 1)");
  if (c.lstm_hidden_units < 1) fail("lstm_hidden_units must be >= 1");
  if (c.lstm_dropout_rate < 0.0 || c.lstm_dropout_rate >= 1.0)
    fail("lstm_dropout_rate must be in [0, 1)");
  if (c.dense_output_dim != 1) fail("dense_output_dim must be 1");
  if (c.epochs < 1) fail("epochs must be >= 1");
  if (c.lr_initial <= 0.0) fail("lr_initial must be positive");
  if (c.lr_floor <= 0.0) fail("lr_floor must be positive");
  if (c.lr_floor > c.lr_initial) fail("lr_floor must not exceed lr_initial");
  if (c.lr_patience_epochs < 1) fail("lr_patience_epochs must be >= 1");
  if (c.batch_size < 1) fail("batch_size must be >= 1");
  if (!(c.scale_min < c.scale_max)) fail("scale_min must be < scale_max");
  if (require_input_length && c.input_length < 1) fail("input_length must be >= 1");
}

}  // namespace heartval::nn
