#include "heartval/error.hpp"

namespace heartval {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::signal_too_short: return "SignalTooShort";
    case Errc::too_few_beats: return "TooFewBeats";
    case Errc::empty_after_cleaning: return "EmptyAfterCleaning";
    case Errc::too_short: return "TooShort";
    case Errc::target_too_small: return "TargetTooSmall";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::non_finite_activation: return "NonFiniteActivation";
    case Errc::stale_cache: return "StaleCache";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::invalid_alpha: return "InvalidAlpha";
    case Errc::empty_posterior: return "EmptyPosterior";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::insufficient_subjects: return "InsufficientSubjects";
    case Errc::empty_records: return "EmptyRecords";
    case Errc::empty_input: return "EmptyInput";
    case Errc::out_of_scale: return "OutOfScale";
    case Errc::missing_manifest: return "MissingManifest";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::all_trials_skipped: return "AllTrialsSkipped";
    case Errc::invalid_beat_times: return "InvalidBeatTimes";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace heartval
