// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/pose.hpp"

namespace retarget {

// Procedural single-subject clips for demos and CPU-scale test runs: an
// animated skeleton plus a deterministic renderer that turns each pose into
// a "ground truth" frame (gradient background, colored body, face details).
// Everything is a pure function of the config and frame number.
struct SynthSubjectConfig {
  std::string subject_id = "subjectA";
  int width = 128;
  int height = 64;
  int n_frames = 32;
  double fps = 30.0;
  double motion_phase = 0.0;       // shifts the dance cycle
  double depth_amplitude = 1.0;    // 0..1, scales near/far travel
  std::vector<int64_t> drop_nose_at;   // frames with an undetected nose
  std::vector<int64_t> drop_ankle_at;  // frames with an undetected left ankle
};

Pose synth_pose(const SynthSubjectConfig& config, int64_t frame);
Image synth_frame(const SynthSubjectConfig& config, const Pose& pose);

PoseSequence synth_pose_sequence(const SynthSubjectConfig& config);

// Writes frame_XXXXXX.png and frame_XXXXXX_keypoints.json files, creating
// the directories as needed.
void write_synth_dataset(const SynthSubjectConfig& config, const std::string& frames_dir,
                         const std::string& poses_dir);

// Detector-style JSON for one pose (single person).
std::string pose_to_detector_json(const Pose& pose);

}  // namespace retarget
