#pragma once

#include <iosfwd>
#include <string>

#include "heartval/data.hpp"
#include "heartval/nn/config.hpp"

namespace heartval::cli {

// The only exit codes any command may return.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMissingManifest = 2;
inline constexpr int kExitNonFiniteLoss = 3;
inline constexpr int kExitFoldFailure = 4;
inline constexpr int kExitMalformedGrid = 5;
inline constexpr int kExitInvalidSpec = 6;

// Everything a run needs, read from one flat key=value file. The seed key
// maps onto model.seed and drives every derived stream.
struct RunConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path out_dir;
  std::string input_kind = "auto";  // auto | ibi | ecg
  nn::ModelConfig model;
  int n_passes = 1000;
  std::vector<double> alphas = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  int k_out = 0;  // 0 = floor(n_subjects / n_folds)
  int n_folds = 10;
  int n_val_subjects = 4;
  int workers = 1;
  bool dump_posteriors = false;
};

// Throws InvalidConfig on unknown keys or bad values; unmentioned keys keep
// their defaults. run_config_text round-trips through parse_run_config.
RunConfig parse_run_config(const std::string& text);
std::string run_config_text(const RunConfig& config);

// Same contract for synthetic-corpus specs. Values are validated by
// data::validate, so a bad spec surfaces as InvalidSpec.
data::SyntheticSpec parse_synth_spec(const std::string& text);
std::string synth_spec_text(const data::SyntheticSpec& spec);

// Full dispatch: parses argv, runs one command, maps every failure onto the
// exit codes above. All output goes through the given streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heartval::cli
