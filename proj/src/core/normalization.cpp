// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/kv.hpp"

namespace retarget {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n == 0) fail(ErrorCode::insufficient_data, "median of empty set");
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void SubjectStats::validate() const {
  if (close_y < far_y) fail(ErrorCode::degenerate_range, "close_y below far_y");
  if (close_y == far_y) fail(ErrorCode::degenerate_range, "close_y equals far_y");
  if (height_close <= 0.0 || height_far <= 0.0)
    fail(ErrorCode::non_positive_height, "subject heights must be positive");
}

SubjectStats compute_subject_stats(const PoseSequence& seq, double alpha, FarPositionRule rule) {
  std::vector<double> ankle_ys;
  std::vector<double> heights;
  for (const Pose& pose : seq.poses) {
    const auto& topo = *pose.topology;
    if (!pose.present(topo.left_ankle) || !pose.present(topo.right_ankle) ||
        !pose.present(topo.nose))
      continue;
    ankle_ys.push_back(avg_ankle_y(pose));
    heights.push_back(subject_height(pose));
  }
  if (ankle_ys.size() < 2)
    fail(ErrorCode::insufficient_data,
         "need at least 2 frames with both ankles and nose, got " +
             std::to_string(ankle_ys.size()));

  SubjectStats stats;
  stats.alpha = alpha;
  stats.close_y = *std::max_element(ankle_ys.begin(), ankle_ys.end());
  stats.median_y = median(ankle_ys);
  const double min_y = *std::min_element(ankle_ys.begin(), ankle_ys.end());
  if (stats.close_y == min_y)
    fail(ErrorCode::degenerate_range, "all frames share the same ankle position");

  // Cluster of far (low-y) positions; see FarPositionRule.
  double far = min_y;
  bool found = false;
  const double close_span = stats.close_y - stats.median_y;
  for (double s : ankle_ys) {
    if (s >= stats.median_y) continue;
    const bool in_cluster = rule == FarPositionRule::prose
                                ? (stats.median_y - s) >= alpha * close_span
                                : std::abs(s - stats.median_y) < alpha * std::abs(close_span);
    if (in_cluster && (!found || s > far)) {
      far = s;
      found = true;
    }
  }
  stats.far_y = found ? far : min_y;

  // Median height over frames near each anchor position.
  const double band = 0.05 * (stats.close_y - stats.far_y);
  std::vector<double> close_heights, far_heights;
  for (size_t i = 0; i < ankle_ys.size(); ++i) {
    if (std::abs(ankle_ys[i] - stats.close_y) <= band) close_heights.push_back(heights[i]);
    if (std::abs(ankle_ys[i] - stats.far_y) <= band) far_heights.push_back(heights[i]);
  }
  stats.height_close = median(std::move(close_heights));
  stats.height_far = median(std::move(far_heights));
  stats.validate();
  return stats;
}

double translation_for(double y, const SubjectStats& src, const SubjectStats& tgt) {
  const double span = src.close_y - src.far_y;
  if (span == 0.0) fail(ErrorCode::degenerate_range, "source ankle range is degenerate");
  return tgt.far_y + (y - src.far_y) / span * (tgt.close_y - tgt.far_y);
}

double scale_for(double y, const SubjectStats& src, const SubjectStats& tgt) {
  const double span = src.close_y - src.far_y;
  if (span == 0.0) fail(ErrorCode::degenerate_range, "source ankle range is degenerate");
  if (src.height_close <= 0.0 || src.height_far <= 0.0 || tgt.height_close <= 0.0 ||
      tgt.height_far <= 0.0)
    fail(ErrorCode::non_positive_height, "scale_for needs positive heights");
  const double c_close = tgt.height_close / src.height_close;
  const double c_far = tgt.height_far / src.height_far;
  return c_far + (y - src.far_y) / span * (c_close - c_far);
}

Pose normalize_pose(const Pose& pose, const SubjectStats& src, const SubjectStats& tgt) {
  const Keypoint anchor = avg_ankle_point(pose);  // throws MissingJoint if no ankles
  const double mapped_y = translation_for(anchor.y, src, tgt);
  const double s = scale_for(anchor.y, src, tgt);
  const double dy = mapped_y - anchor.y;

  Pose out = pose;
  for (int j = 0; j < out.joint_count(); ++j) {
    if (!out.present(j)) continue;
    Keypoint& kp = out.joint(j);
    // Translate vertically, then scale both axes about (anchor.x, mapped_y)
    // so the mapped ankle line stays put.
    const double ty = kp.y + dy;
    kp.x = anchor.x + s * (kp.x - anchor.x);
    kp.y = mapped_y + s * (ty - mapped_y);
  }
  return out;
}

void save_subject_stats(const SubjectStats& stats, const std::string& path) {
  KeyValueFile kv;
  kv.set("subject", stats.subject_id);
  kv.set_double("close_y", stats.close_y);
  kv.set_double("far_y", stats.far_y);
  kv.set_double("height_close", stats.height_close);
  kv.set_double("height_far", stats.height_far);
  kv.set_double("median_y", stats.median_y);
  kv.set_double("alpha", stats.alpha);
  kv.save(path);
}

SubjectStats load_subject_stats(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SubjectStats stats;
  stats.subject_id = kv.get_or("subject", "");
  stats.close_y = kv.get_double("close_y");
  stats.far_y = kv.get_double("far_y");
  stats.height_close = kv.get_double("height_close");
  stats.height_far = kv.get_double("height_far");
  stats.median_y = kv.get_double_or("median_y", 0.5 * (stats.close_y + stats.far_y));
  stats.alpha = kv.get_double_or("alpha", 0.7);
  stats.validate();
  return stats;
}

}  // namespace retarget
