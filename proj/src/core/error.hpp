// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace retarget {

// Every failure the library reports deliberately. The C boundary maps these
// onto rt_error_code one-to-one, so keep the two lists in sync.
enum class ErrorCode {
  malformed_input,
  no_person_detected,
  topology_mismatch,
  no_common_joints,
  missing_joint,
  insufficient_data,
  degenerate_range,
  non_positive_height,
  invalid_config,
  out_of_bounds,
  size_mismatch,
  shape_mismatch,
  empty_dataset,
  empty_sequence,
  label_imbalance,
  too_few_frames,
  stage_order_violation,
  non_finite_loss,
  untrained_model,
  no_frames,
  index_mismatch,
  invalid_fraction,
  length_mismatch,
  io_error,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

  // Validation errors are caller mistakes (bad input, bad config); everything
  // else counts as a runtime failure. The CLI uses this for its exit codes.
  bool is_validation() const {
    switch (code_) {
      case ErrorCode::non_finite_loss:
      case ErrorCode::io_error:
      case ErrorCode::internal:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_input: return "MalformedInput";
    case ErrorCode::no_person_detected: return "NoPersonDetected";
    case ErrorCode::topology_mismatch: return "TopologyMismatch";
    case ErrorCode::no_common_joints: return "NoCommonJoints";
    case ErrorCode::missing_joint: return "MissingJoint";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::degenerate_range: return "DegenerateRange";
    case ErrorCode::non_positive_height: return "NonPositiveHeight";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::out_of_bounds: return "OutOfBounds";
    case ErrorCode::size_mismatch: return "SizeMismatch";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::empty_sequence: return "EmptySequence";
    case ErrorCode::label_imbalance: return "LabelImbalance";
    case ErrorCode::too_few_frames: return "TooFewFrames";
    case ErrorCode::stage_order_violation: return "StageOrderViolation";
    case ErrorCode::non_finite_loss: return "NonFiniteLoss";
    case ErrorCode::untrained_model: return "UntrainedModel";
    case ErrorCode::no_frames: return "NoFrames";
    case ErrorCode::index_mismatch: return "IndexMismatch";
    case ErrorCode::invalid_fraction: return "InvalidFraction";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace retarget
