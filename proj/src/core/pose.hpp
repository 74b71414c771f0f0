// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"

namespace retarget {

// Keypoints with confidence below this are "missing": the detector emits
// exact zeros for undetected joints, the epsilon guards float noise.
inline constexpr double kMissingConfidence = 0.05;

struct Keypoint {
  double x = 0.0;  // pixels, image coordinates (y grows downward)
  double y = 0.0;
  double confidence = 0.0;  // in [0,1]

  bool present() const { return confidence >= kMissingConfidence; }
};

// Joint connectivity plus the named indices the pipeline needs. The default
// is the 25-joint body layout of the common open-source detector; tests and
// custom datasets can register their own.
struct SkeletonTopology {
  std::string name;
  std::vector<std::string> joint_names;
  std::vector<std::pair<int, int>> limbs;
  std::vector<std::array<uint8_t, 3>> limb_colors;  // one RGB triple per limb
  int nose = -1;
  int left_ankle = -1;
  int right_ankle = -1;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  void validate() const;

  // Evenly spaced hues around the color wheel, one per limb.
  static std::vector<std::array<uint8_t, 3>> default_palette(int n_limbs);

  static std::shared_ptr<const SkeletonTopology> body25();
};

struct Pose {
  std::vector<Keypoint> keypoints;
  std::shared_ptr<const SkeletonTopology> topology;

  int joint_count() const { return static_cast<int>(keypoints.size()); }
  bool present(int joint) const { return keypoints[static_cast<size_t>(joint)].present(); }
  const Keypoint& joint(int i) const { return keypoints[static_cast<size_t>(i)]; }
  Keypoint& joint(int i) { return keypoints[static_cast<size_t>(i)]; }

  static Pose empty(std::shared_ptr<const SkeletonTopology> topo);
};

struct PoseSequence {
  std::vector<Pose> poses;
  std::vector<int64_t> frame_indices;  // strictly increasing
  double fps = 0.0;

  size_t size() const { return poses.size(); }
  void validate() const;
};

enum class PersonSelectionPolicy {
  highest_total_confidence,  // default: the most confidently detected person
  first,
};

// Parses one frame of detector output ("people" array, flat
// [x0,y0,c0,x1,y1,c1,...] keypoint list per person).
Pose parse_detector_frame(const std::string& json_text,
                          std::shared_ptr<const SkeletonTopology> topology,
                          PersonSelectionPolicy policy = PersonSelectionPolicy::highest_total_confidence);

// Mean L2 distance over joints present in both poses; the joint count is
// renormalized to the intersection.
double pose_distance(const Pose& a, const Pose& b);

// Mean of the two ankle y coordinates. Both ankles must be present.
double avg_ankle_y(const Pose& pose);

// Mean of the two ankle positions (x and y).
Keypoint avg_ankle_point(const Pose& pose);

// Euclidean distance from the average ankle position to the nose.
double subject_height(const Pose& pose);

}  // namespace retarget
