// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/synthdata.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/manifest.hpp"
#include "core/render.hpp"

namespace retarget {

namespace {

constexpr double kTau = 6.283185307179586;

uint64_t style_hash(const std::string& id) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::array<uint8_t, 3> style_color(uint64_t hash, int slot, int floor_v) {
  const auto byte = [&](int i) {
    return static_cast<uint8_t>(floor_v + ((hash >> (8 * ((slot * 3 + i) % 8))) & 0x7f));
  };
  return {byte(0), byte(1), byte(2)};
}

struct Joints {
  // Indices follow SkeletonTopology::body25().
  std::array<Keypoint, 25> kp;
};

}  // namespace

Pose synth_pose(const SynthSubjectConfig& config, int64_t frame) {
  const double t = static_cast<double>(frame) / std::max(1, config.n_frames);
  const double phase = config.motion_phase;
  const double w = config.width, h = config.height;

  // Depth cycle drives both the ankle line and the body scale; sway drives
  // the horizontal position; limbs swing with the step cycle.
  const double depth = 0.5 + 0.5 * std::sin(kTau * (1.7 * t) + phase) * config.depth_amplitude;
  const double scale = 0.55 + 0.45 * depth;
  const double ankle_y = h * (0.70 + 0.24 * depth);
  const double cx = w * (0.5 + 0.28 * std::sin(kTau * t + phase));
  const double step = std::sin(kTau * (3.0 * t) + phase);
  const double arm = std::sin(kTau * (3.0 * t) + 1.3 + phase);

  const double unit = 0.40 * h * scale;  // hip-to-ankle distance
  const double hip_y = ankle_y - unit;
  const double neck_y = hip_y - 0.75 * unit;
  const double nose_y = neck_y - 0.30 * unit;
  const double shoulder_dx = 0.28 * unit;
  const double hip_dx = 0.20 * unit;

  Pose pose = Pose::empty(SkeletonTopology::body25());
  auto set = [&](int j, double x, double y) { pose.joint(j) = {x, y, 1.0}; };

  set(0, cx, nose_y);                       // nose
  set(1, cx, neck_y);                       // neck
  set(8, cx, hip_y);                        // mid hip
  set(15, cx - 0.08 * unit, nose_y - 0.02 * unit);  // eyes
  set(16, cx + 0.08 * unit, nose_y - 0.02 * unit);
  set(17, cx - 0.16 * unit, nose_y + 0.04 * unit);  // ears
  set(18, cx + 0.16 * unit, nose_y + 0.04 * unit);

  // Arms (right = 2,3,4; left = 5,6,7).
  const double arm_len = 0.45 * unit;
  set(2, cx - shoulder_dx, neck_y + 0.05 * unit);
  set(5, cx + shoulder_dx, neck_y + 0.05 * unit);
  const double ra = 0.5 * arm, la = -0.5 * arm;
  set(3, cx - shoulder_dx - arm_len * std::cos(0.4 + ra) * 0.6,
      neck_y + 0.05 * unit + arm_len * 0.7);
  set(6, cx + shoulder_dx + arm_len * std::cos(0.4 + la) * 0.6,
      neck_y + 0.05 * unit + arm_len * 0.7);
  set(4, pose.joint(3).x - arm_len * 0.5 * std::sin(ra),
      pose.joint(3).y + arm_len * 0.7 * std::cos(ra * 0.8));
  set(7, pose.joint(6).x + arm_len * 0.5 * std::sin(la),
      pose.joint(6).y + arm_len * 0.7 * std::cos(la * 0.8));

  // Legs (right = 9,10,11 + toes 22..24; left = 12,13,14 + toes 19..21).
  const double leg_swing = 0.16 * unit * step;
  set(9, cx - hip_dx, hip_y);
  set(12, cx + hip_dx, hip_y);
  set(10, cx - hip_dx - leg_swing, hip_y + 0.5 * unit);
  set(13, cx + hip_dx + leg_swing, hip_y + 0.5 * unit);
  set(11, cx - hip_dx - 0.4 * leg_swing, ankle_y);
  set(14, cx + hip_dx + 0.4 * leg_swing, ankle_y);
  set(22, pose.joint(11).x - 0.08 * unit, ankle_y + 0.05 * unit);
  set(23, pose.joint(11).x - 0.12 * unit, ankle_y + 0.05 * unit);
  set(24, pose.joint(11).x + 0.03 * unit, ankle_y + 0.04 * unit);
  set(19, pose.joint(14).x + 0.08 * unit, ankle_y + 0.05 * unit);
  set(20, pose.joint(14).x + 0.12 * unit, ankle_y + 0.05 * unit);
  set(21, pose.joint(14).x - 0.03 * unit, ankle_y + 0.04 * unit);

  for (int64_t f : config.drop_nose_at)
    if (f == frame) pose.joint(0).confidence = 0.0;
  for (int64_t f : config.drop_ankle_at)
    if (f == frame) pose.joint(14).confidence = 0.0;
  return pose;
}

Image synth_frame(const SynthSubjectConfig& config, const Pose& pose) {
  const uint64_t style = style_hash(config.subject_id);
  const auto bg_top = style_color(style, 0, 96);
  const auto bg_bottom = style_color(style, 1, 32);
  const auto shirt = style_color(style, 2, 100);
  const auto pants = style_color(style, 3, 60);
  const auto skin = std::array<uint8_t, 3>{214, 178, 148};
  const auto dark = std::array<uint8_t, 3>{30, 24, 20};

  Image img(config.width, config.height, 3);
  for (int y = 0; y < img.height; ++y) {
    const double a = static_cast<double>(y) / std::max(1, img.height - 1);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = byte_to_float(static_cast<uint8_t>(
            (1.0 - a) * bg_top[static_cast<size_t>(c)] + a * bg_bottom[static_cast<size_t>(c)]));
  }
  // Floor band.
  for (int y = static_cast<int>(img.height * 0.93); y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = byte_to_float(bg_bottom[static_cast<size_t>(c)] / 2);

  const auto& topo = *pose.topology;
  auto seg = [&](int a, int b, double radius, const std::array<uint8_t, 3>& color) {
    // The body is drawn from the skeleton geometry whether or not the
    // detector "saw" a joint, so dropped keypoints do not change the scene.
    draw_capsule(img, pose.joint(a).x, pose.joint(a).y, pose.joint(b).x, pose.joint(b).y, radius,
                 color);
  };
  const double unit =
      std::abs(pose.joint(topo.nose).y - pose.joint(8).y) + 1e-6;  // nose-to-hip span
  const double limb = std::max(1.2, 0.10 * unit);

  // Torso, arms, legs, then the head on top.
  seg(1, 8, 2.4 * limb, shirt);
  seg(2, 3, limb, shirt);
  seg(3, 4, limb, skin);
  seg(5, 6, limb, shirt);
  seg(6, 7, limb, skin);
  seg(9, 10, 1.4 * limb, pants);
  seg(10, 11, 1.2 * limb, pants);
  seg(12, 13, 1.4 * limb, pants);
  seg(13, 14, 1.2 * limb, pants);
  seg(11, 22, limb, dark);
  seg(14, 19, limb, dark);

  const double head_r = 0.55 * unit * 0.5 + 1.0;
  draw_capsule(img, pose.joint(0).x, pose.joint(0).y, pose.joint(0).x, pose.joint(0).y, head_r,
               skin);
  // Face details give the face stage something to refine.
  const double eye_r = std::max(0.6, head_r * 0.18);
  draw_capsule(img, pose.joint(15).x, pose.joint(15).y, pose.joint(15).x, pose.joint(15).y,
               eye_r, dark);
  draw_capsule(img, pose.joint(16).x, pose.joint(16).y, pose.joint(16).x, pose.joint(16).y,
               eye_r, dark);
  draw_capsule(img, pose.joint(0).x - eye_r, pose.joint(0).y + head_r * 0.45,
               pose.joint(0).x + eye_r, pose.joint(0).y + head_r * 0.45, eye_r * 0.5,
               {120, 40, 40});
  return img;
}

PoseSequence synth_pose_sequence(const SynthSubjectConfig& config) {
  PoseSequence seq;
  seq.fps = config.fps;
  for (int64_t f = 0; f < config.n_frames; ++f) {
    seq.poses.push_back(synth_pose(config, f));
    seq.frame_indices.push_back(f);
  }
  return seq;
}

std::string pose_to_detector_json(const Pose& pose) {
  nlohmann::json flat = nlohmann::json::array();
  for (const auto& kp : pose.keypoints) {
    flat.push_back(kp.x);
    flat.push_back(kp.y);
    flat.push_back(kp.confidence);
  }
  nlohmann::json doc;
  doc["version"] = 1.3;
  doc["people"] = nlohmann::json::array({nlohmann::json{{"pose_keypoints_2d", flat}}});
  return doc.dump();
}

void write_synth_dataset(const SynthSubjectConfig& config, const std::string& frames_dir,
                         const std::string& poses_dir) {
  std::filesystem::create_directories(frames_dir);
  std::filesystem::create_directories(poses_dir);
  for (int64_t f = 0; f < config.n_frames; ++f) {
    const Pose pose = synth_pose(config, f);
    save_image(synth_frame(config, pose), frames_dir + "/" + frame_file_name(f));
    std::ofstream out(poses_dir + "/" + pose_file_name(f));
    if (!out) fail(ErrorCode::io_error, "cannot write pose file");
    out << pose_to_detector_json(pose);
  }
}

}  // namespace retarget
