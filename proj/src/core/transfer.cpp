// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/transfer.hpp"

#include <cmath>
#include <limits>

#include "core/render.hpp"

namespace retarget {

namespace {

// One frame's normalization: vertical shift then uniform scaling about the
// mapped ankle anchor. Kept explicitly so frames with missing ankles can
// reuse the previous frame's transform.
struct PoseTransform {
  double anchor_x = 0.0, mapped_y = 0.0, dy = 0.0, scale = 1.0;
  bool identity = true;

  Pose apply(const Pose& pose) const {
    if (identity) return pose;
    Pose out = pose;
    for (int j = 0; j < out.joint_count(); ++j) {
      if (!out.present(j)) continue;
      Keypoint& kp = out.joint(j);
      const double ty = kp.y + dy;
      kp.x = anchor_x + scale * (kp.x - anchor_x);
      kp.y = mapped_y + scale * (ty - mapped_y);
    }
    return out;
  }
};

PoseTransform transform_for(const Pose& pose, const SubjectStats& src, const SubjectStats& tgt) {
  const Keypoint anchor = avg_ankle_point(pose);
  PoseTransform t;
  t.anchor_x = anchor.x;
  t.mapped_y = translation_for(anchor.y, src, tgt);
  t.dy = t.mapped_y - anchor.y;
  t.scale = scale_for(anchor.y, src, tgt);
  t.identity = false;
  return t;
}

bool ankles_present(const Pose& pose) {
  return pose.present(pose.topology->left_ankle) && pose.present(pose.topology->right_ankle);
}

void scale_pose_coords(Pose& pose, double sx, double sy) {
  for (auto& kp : pose.keypoints) {
    kp.x *= sx;
    kp.y *= sy;
  }
}

}  // namespace

TransferResult transfer_video(const PoseSequence& source, const SubjectStats& source_stats,
                              const SubjectStats& target_stats, const ModelBundle& bundle,
                              Mode mode, int target_width, int target_height,
                              const TransferHooks* hooks) {
  if (source.poses.empty()) fail(ErrorCode::empty_sequence, "no source poses");
  if (!bundle.global_done)
    fail(ErrorCode::untrained_model, "transfer requires a trained global stage");
  if (bundle.arch.stage == Stage::local_stage && !bundle.local_done)
    fail(ErrorCode::untrained_model, "transfer requires a trained local stage");
  if (mode_has_face(mode) && !bundle.face_done)
    fail(ErrorCode::untrained_model, "FG transfer requires a trained face stage");
  if (mode_is_temporal(mode) && !mode_is_temporal(bundle.mode))
    fail(ErrorCode::invalid_config, "temporal transfer needs a temporally trained bundle");

  const int width = bundle.arch.image_width;
  const int height = bundle.arch.image_height;
  const double sx = target_width > 0 ? static_cast<double>(width) / target_width : 1.0;
  const double sy = target_height > 0 ? static_cast<double>(height) / target_height : 1.0;

  TransferResult result;
  result.frames.reserve(source.size());
  result.normalized_poses.reserve(source.size());

  PoseTransform transform;  // identity until the first frame with ankles
  Image prev(width, height, 3, 0.0f);
  for (size_t i = 0; i < source.poses.size(); ++i) {
    const Pose& raw = source.poses[i];
    if (ankles_present(raw)) transform = transform_for(raw, source_stats, target_stats);
    Pose normalized = transform.apply(raw);
    scale_pose_coords(normalized, sx, sy);
    result.normalized_poses.push_back(normalized);

    const Image pose_image = render_stick_figure(normalized, width, height);
    if (!mode_is_temporal(mode) && i > 0) prev = Image(width, height, 3, 0.0f);
    if (hooks && hooks->on_generator_input) hooks->on_generator_input(i, prev);
    Image frame = bundle.generator_forward(pose_image, prev);
    prev = frame;  // conditioning for the next frame (temporal mode)

    if (mode_has_face(mode) && normalized.present(normalized.topology->nose)) {
      const FaceBox box = face_box(normalized, bundle.arch.face_size, width, height);
      const Image residual = bundle.face_generator_forward(crop_region(pose_image, box),
                                                           crop_region(frame, box));
      frame = composite_residual(frame, residual, box);
    }
    result.frames.push_back(std::move(frame));
  }
  return result;
}

NnBaselineResult nn_baseline_video(const PoseSequence& source,
                                   const PoseSequence& target_train_poses,
                                   const std::vector<Image>& target_train_frames,
                                   const std::optional<SubjectStats>& source_stats,
                                   const std::optional<SubjectStats>& target_stats) {
  if (source.poses.empty()) fail(ErrorCode::empty_sequence, "no source poses");
  if (target_train_poses.poses.empty())
    fail(ErrorCode::empty_dataset, "no target training poses");
  if (!target_train_frames.empty() &&
      target_train_frames.size() != target_train_poses.poses.size())
    fail(ErrorCode::length_mismatch, "target frames do not match target poses");

  const bool normalize = source_stats.has_value() && target_stats.has_value();
  NnBaselineResult result;
  result.matched_indices.reserve(source.size());

  PoseTransform transform;
  for (const Pose& raw : source.poses) {
    Pose query = raw;
    if (normalize) {
      if (ankles_present(raw)) transform = transform_for(raw, *source_stats, *target_stats);
      query = transform.apply(raw);
    }

    double best = std::numeric_limits<double>::infinity();
    size_t best_index = 0;
    bool comparable = false;
    for (size_t t = 0; t < target_train_poses.poses.size(); ++t) {
      double d;
      try {
        d = pose_distance(query, target_train_poses.poses[t]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::no_common_joints) continue;
        throw;
      }
      if (d < best) {  // strict: ties keep the lower index
        best = d;
        best_index = t;
        comparable = true;
      }
    }
    if (!comparable)
      fail(ErrorCode::no_common_joints, "source pose shares no joints with any target pose");
    result.matched_indices.push_back(best_index);
    if (!target_train_frames.empty()) result.frames.push_back(target_train_frames[best_index]);
  }
  return result;
}

}  // namespace retarget
