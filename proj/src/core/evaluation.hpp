// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/pose.hpp"

namespace retarget {

// Structural similarity on the grayscale conversion of two equal-size
// frames: 11x11 Gaussian window (sigma 1.5), stability constants
// C1=(0.01L)^2, C2=(0.03L)^2 on unit range, averaged over the region where
// the window fits. Symmetric; exactly 1.0 for identical images.
double ssim(const Image& a, const Image& b);

// Optional learned perceptual distance, supplied externally. Never a hard
// dependency: when no plugin is registered the LPIPS columns stay empty.
using LpipsFn = std::function<double(const Image& a, const Image& b)>;
void register_lpips_plugin(LpipsFn fn);
void clear_lpips_plugin();
bool has_lpips_plugin();

struct MetricSet {
  double ssim = 0.0;
  std::optional<double> lpips;
};

struct RegionMetrics {
  std::optional<MetricSet> face;  // absent when the nose is missing
  MetricSet body;
};

// Face crop around the nose (same geometry as the face GAN crop) and a body
// crop from the bounding box of present keypoints padded by 10% per side.
RegionMetrics region_metrics(const Image& pred, const Image& gt, const Pose& pose,
                             int face_size);

struct FrameMetricsRow {
  int64_t frame_index = 0;
  std::optional<MetricSet> face;
  MetricSet body;
};

struct SequenceReport {
  std::vector<FrameMetricsRow> rows;
  std::optional<double> face_ssim_mean;
  double body_ssim_mean = 0.0;
  std::optional<double> face_lpips_mean;
  std::optional<double> body_lpips_mean;
};

SequenceReport evaluate_sequence(const std::vector<Image>& pred_frames,
                                 const std::vector<Image>& gt_frames,
                                 const std::vector<Pose>& poses, int face_size);

// One row per frame plus an aggregate footer; missing values print as "-".
void save_report(const SequenceReport& report, const std::string& path);

}  // namespace retarget
