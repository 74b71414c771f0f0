// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "core/nets.hpp"
#include "core/normalization.hpp"

namespace retarget {

struct TransferHooks {
  // Observes the previous-frame conditioning input per generated frame.
  std::function<void(size_t frame, const Image& prev)> on_generator_input;
};

struct TransferResult {
  std::vector<Image> frames;
  std::vector<Pose> normalized_poses;  // in target coordinates
};

// Motion transfer: normalize each source pose into the target's statistics,
// render the stick figure, generate sequentially (frame t conditioned on
// generated frame t-1, the zero image at t=0), and composite the face
// residual in FG mode. Source frames whose ankles are missing reuse the
// previous frame's normalization transform (identity before the first
// computable frame).
//
// target_width/height give the coordinate frame the target stats live in;
// poses are scaled from there to the bundle's generation resolution. Zero
// means "already in generation coordinates".
TransferResult transfer_video(const PoseSequence& source, const SubjectStats& source_stats,
                              const SubjectStats& target_stats, const ModelBundle& bundle,
                              Mode mode, int target_width = 0, int target_height = 0,
                              const TransferHooks* hooks = nullptr);

struct NnBaselineResult {
  std::vector<Image> frames;          // matched target training frames
  std::vector<size_t> matched_indices;  // positions into the target sequence
};

// Nearest-neighbor baseline: for each (normalized) source pose, the target
// training frame minimizing the mean joint distance; ties break to the
// lowest frame index. The matched frames are concatenated in source order.
NnBaselineResult nn_baseline_video(const PoseSequence& source,
                                   const PoseSequence& target_train_poses,
                                   const std::vector<Image>& target_train_frames,
                                   const std::optional<SubjectStats>& source_stats,
                                   const std::optional<SubjectStats>& target_stats);

}  // namespace retarget
