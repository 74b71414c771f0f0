// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/pose.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace retarget {

void SkeletonTopology::validate() const {
  const int n = joint_count();
  if (n <= 0) fail(ErrorCode::topology_mismatch, "topology has no joints");
  auto check_index = [&](int j, const char* what) {
    if (j < 0 || j >= n) fail(ErrorCode::topology_mismatch, std::string("invalid ") + what + " index");
  };
  check_index(nose, "nose");
  check_index(left_ankle, "left ankle");
  check_index(right_ankle, "right ankle");
  for (const auto& [a, b] : limbs) {
    check_index(a, "limb endpoint");
    check_index(b, "limb endpoint");
  }
  if (limb_colors.size() != limbs.size())
    fail(ErrorCode::topology_mismatch, "limb color count does not match limb count");
}

std::vector<std::array<uint8_t, 3>> SkeletonTopology::default_palette(int n_limbs) {
  std::vector<std::array<uint8_t, 3>> palette;
  palette.reserve(static_cast<size_t>(n_limbs));
  for (int i = 0; i < n_limbs; ++i) {
    // HSV with s = v = 1, hue evenly spaced.
    const double h = 6.0 * static_cast<double>(i) / static_cast<double>(std::max(1, n_limbs));
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const auto to_byte = [](double v) { return static_cast<uint8_t>(std::lround(v * 255.0)); };
    double r = 0, g = 0, b = 0;
    switch (sector) {
      case 0: r = 1; g = f; b = 0; break;
      case 1: r = 1 - f; g = 1; b = 0; break;
      case 2: r = 0; g = 1; b = f; break;
      case 3: r = 0; g = 1 - f; b = 1; break;
      case 4: r = f; g = 0; b = 1; break;
      default: r = 1; g = 0; b = 1 - f; break;
    }
    palette.push_back({to_byte(r), to_byte(g), to_byte(b)});
  }
  return palette;
}

std::shared_ptr<const SkeletonTopology> SkeletonTopology::body25() {
  static const std::shared_ptr<const SkeletonTopology> topo = [] {
    auto t = std::make_shared<SkeletonTopology>();
    t->name = "body25";
    t->joint_names = {
        "nose",        "neck",        "right_shoulder", "right_elbow", "right_wrist",
        "left_shoulder", "left_elbow", "left_wrist",    "mid_hip",     "right_hip",
        "right_knee",  "right_ankle", "left_hip",       "left_knee",   "left_ankle",
        "right_eye",   "left_eye",    "right_ear",      "left_ear",    "left_big_toe",
        "left_small_toe", "left_heel", "right_big_toe", "right_small_toe", "right_heel"};
    t->limbs = {{1, 8},   {1, 2},   {1, 5},   {2, 3},   {3, 4},   {5, 6},
                {6, 7},   {8, 9},   {9, 10},  {10, 11}, {8, 12},  {12, 13},
                {13, 14}, {1, 0},   {0, 15},  {15, 17}, {0, 16},  {16, 18},
                {14, 19}, {19, 20}, {14, 21}, {11, 22}, {22, 23}, {11, 24}};
    t->limb_colors = default_palette(static_cast<int>(t->limbs.size()));
    t->nose = 0;
    t->left_ankle = 14;
    t->right_ankle = 11;
    t->validate();
    return std::shared_ptr<const SkeletonTopology>(t);
  }();
  return topo;
}

Pose Pose::empty(std::shared_ptr<const SkeletonTopology> topo) {
  Pose p;
  p.keypoints.resize(static_cast<size_t>(topo->joint_count()));
  p.topology = std::move(topo);
  return p;
}

void PoseSequence::validate() const {
  if (poses.size() != frame_indices.size())
    fail(ErrorCode::length_mismatch, "pose sequence index count mismatch");
  for (size_t i = 1; i < frame_indices.size(); ++i)
    if (frame_indices[i] <= frame_indices[i - 1])
      fail(ErrorCode::index_mismatch, "frame indices not strictly increasing");
  for (size_t i = 1; i < poses.size(); ++i)
    if (poses[i].topology != poses[0].topology)
      fail(ErrorCode::topology_mismatch, "mixed topologies in sequence");
}

Pose parse_detector_frame(const std::string& json_text,
                          std::shared_ptr<const SkeletonTopology> topology,
                          PersonSelectionPolicy policy) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    fail(ErrorCode::malformed_input, "detector frame is not a JSON object");
  if (!doc.contains("people") || !doc["people"].is_array())
    fail(ErrorCode::malformed_input, "detector frame has no \"people\" array");
  const auto& people = doc["people"];
  if (people.empty()) fail(ErrorCode::no_person_detected, "no person detected in frame");

  const int n_joints = topology->joint_count();
  auto extract = [&](const nlohmann::json& person) {
    if (!person.is_object() || !person.contains("pose_keypoints_2d") ||
        !person["pose_keypoints_2d"].is_array())
      fail(ErrorCode::malformed_input, "person entry has no \"pose_keypoints_2d\" list");
    const auto& flat = person["pose_keypoints_2d"];
    if (static_cast<int>(flat.size()) != 3 * n_joints)
      fail(ErrorCode::topology_mismatch,
           "keypoint list has " + std::to_string(flat.size() / 3) + " joints, topology has " +
               std::to_string(n_joints));
    Pose p = Pose::empty(topology);
    for (int j = 0; j < n_joints; ++j) {
      const auto& vx = flat[static_cast<size_t>(3 * j)];
      const auto& vy = flat[static_cast<size_t>(3 * j + 1)];
      const auto& vc = flat[static_cast<size_t>(3 * j + 2)];
      if (!vx.is_number() || !vy.is_number() || !vc.is_number())
        fail(ErrorCode::malformed_input, "non-numeric keypoint value");
      p.joint(j) = {vx.get<double>(), vy.get<double>(), vc.get<double>()};
    }
    return p;
  };

  if (policy == PersonSelectionPolicy::first) return extract(people[0]);

  double best_sum = -1.0;
  size_t best_index = 0;
  for (size_t i = 0; i < people.size(); ++i) {
    const auto& person = people[i];
    if (!person.is_object() || !person.contains("pose_keypoints_2d") ||
        !person["pose_keypoints_2d"].is_array())
      fail(ErrorCode::malformed_input, "person entry has no \"pose_keypoints_2d\" list");
    const auto& flat = person["pose_keypoints_2d"];
    double sum = 0.0;
    for (size_t j = 2; j < flat.size(); j += 3) {
      if (!flat[j].is_number()) fail(ErrorCode::malformed_input, "non-numeric confidence");
      sum += flat[j].get<double>();
    }
    if (sum > best_sum) {
      best_sum = sum;
      best_index = i;
    }
  }
  return extract(people[best_index]);
}

double pose_distance(const Pose& a, const Pose& b) {
  if (a.topology != b.topology || a.joint_count() != b.joint_count())
    fail(ErrorCode::topology_mismatch, "pose_distance: different topologies");
  double sum = 0.0;
  int n = 0;
  for (int j = 0; j < a.joint_count(); ++j) {
    if (!a.present(j) || !b.present(j)) continue;
    const double dx = a.joint(j).x - b.joint(j).x;
    const double dy = a.joint(j).y - b.joint(j).y;
    sum += std::sqrt(dx * dx + dy * dy);
    ++n;
  }
  if (n == 0) fail(ErrorCode::no_common_joints, "pose_distance: no joints present in both poses");
  return sum / static_cast<double>(n);
}

double avg_ankle_y(const Pose& pose) {
  return avg_ankle_point(pose).y;
}

Keypoint avg_ankle_point(const Pose& pose) {
  const auto& topo = *pose.topology;
  if (!pose.present(topo.left_ankle))
    fail(ErrorCode::missing_joint, "left ankle missing");
  if (!pose.present(topo.right_ankle))
    fail(ErrorCode::missing_joint, "right ankle missing");
  const Keypoint& l = pose.joint(topo.left_ankle);
  const Keypoint& r = pose.joint(topo.right_ankle);
  return {(l.x + r.x) / 2.0, (l.y + r.y) / 2.0, std::min(l.confidence, r.confidence)};
}

double subject_height(const Pose& pose) {
  const auto& topo = *pose.topology;
  if (!pose.present(topo.nose)) fail(ErrorCode::missing_joint, "nose missing");
  const Keypoint ankles = avg_ankle_point(pose);
  const Keypoint& nose = pose.joint(topo.nose);
  return std::hypot(ankles.x - nose.x, ankles.y - nose.y);
}

}  // namespace retarget
