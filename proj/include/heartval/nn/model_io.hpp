#pragma once

#include <cstdint>
#include <filesystem>

#include "heartval/nn/params.hpp"

namespace heartval::nn {

struct ModelBundle {
  ModelConfig config;  // config.seed records the training seed
  ModelParams params;
};

// Writes `model.meta` (text: config, seed, tensor directory) and `model.bin`
// (the tensors as little-endian doubles, concatenated in directory order)
// into `dir`. load_model restores them bit-exactly. Both throw IoError on
// filesystem failures; load also throws MalformedRow on a bad meta file.
void save_model(const std::filesystem::path& dir, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& dir);

}  // namespace heartval::nn
