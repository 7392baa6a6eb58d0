#pragma once

#include <stdexcept>
#include <string>

namespace heartval {

// Failure kinds surfaced by the library. Tests match on the code, not the
// message text.
enum class Errc {
  signal_too_short,
  too_few_beats,
  empty_after_cleaning,
  too_short,
  target_too_small,
  shape_mismatch,
  non_finite_activation,
  stale_cache,
  length_mismatch,
  empty_dataset,
  non_finite_loss,
  invalid_alpha,
  empty_posterior,
  too_few_samples,
  insufficient_subjects,
  empty_records,
  empty_input,
  out_of_scale,
  missing_manifest,
  malformed_row,
  all_trials_skipped,
  invalid_beat_times,
  invalid_spec,
  invalid_config,
  io_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace heartval
