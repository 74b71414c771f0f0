// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "core/pose.hpp"

namespace retarget {

// Per-subject ankle/height statistics driving the source-to-target pose
// normalization. Image y grows downward, so the position closest to the
// camera has the largest ankle y.
struct SubjectStats {
  std::string subject_id;
  double close_y = 0.0;   // max average ankle y over frames
  double far_y = 0.0;     // robust min (cluster rule below)
  double height_close = 0.0;
  double height_far = 0.0;
  double median_y = 0.0;
  double alpha = 0.7;

  void validate() const;
};

// How far_y is selected from the per-frame average ankle positions.
// - prose: far_y = max{ S < median : (median - S) >= alpha * (close - median) },
//   i.e. a robust farthest position that excludes extreme outliers.
// - literal: the displayed set formula, max{ S < median : |S - median| <
//   alpha * |close - median| }, which picks points near the median instead.
// Both fall back to min(S) when the candidate set is empty.
enum class FarPositionRule { prose, literal };

// Reduces a pose sequence to its normalization statistics. Frames missing an
// ankle or the nose are skipped; at least two usable frames are required.
// Heights at the close/far position are medians over frames whose average
// ankle y lies within 5% of (close_y - far_y) of that position.
SubjectStats compute_subject_stats(const PoseSequence& seq, double alpha = 0.7,
                                   FarPositionRule rule = FarPositionRule::prose);

// Target-frame ankle y for a source pose whose average ankle y is y:
// t_far + (y - s_far)/(s_close - s_far) * (t_close - t_far).
double translation_for(double y, const SubjectStats& src, const SubjectStats& tgt);

// Uniform scale for a source pose at ankle y, interpolating between the
// far and close height ratios.
double scale_for(double y, const SubjectStats& src, const SubjectStats& tgt);

// Vertical translation followed by uniform scaling about the mapped ankle
// anchor, so the average ankle y of the result equals translation_for(y)
// exactly. Missing joints stay missing; confidences are unchanged.
Pose normalize_pose(const Pose& pose, const SubjectStats& src, const SubjectStats& tgt);

// Key-value stats file, reusable across runs.
void save_subject_stats(const SubjectStats& stats, const std::string& path);
SubjectStats load_subject_stats(const std::string& path);

}  // namespace retarget
