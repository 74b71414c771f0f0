// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/manifest.hpp"
#include "core/nets.hpp"

namespace retarget {

// Consecutive-frame training pair; a and b are positions into a
// TrainDataset, frame_a/frame_b the underlying frame indices.
struct TemporalPair {
  size_t a = 0, b = 0;
  int64_t frame_a = 0, frame_b = 0;
};

// All (i, i+stride) frame-index pairs whose two entries are both usable;
// pairs straddling missing or unusable frames are dropped.
std::vector<TemporalPair> make_temporal_pairs(const DatasetManifest& manifest, int stride,
                                              Split split = Split::train);

// Frames, rendered stick figures, and scaled poses preloaded at one
// resolution. Frame images may be an exact match or a power-of-two multiple
// of the target resolution (they are box-downsampled).
struct TrainDataset {
  int width = 0, height = 0;
  std::vector<int64_t> frame_indices;
  std::vector<Image> pose_images;
  std::vector<Image> frames;
  std::vector<Pose> poses;  // keypoints scaled to (width, height)
  std::map<int64_t, size_t> position_of;

  static TrainDataset load(const DatasetManifest& manifest, Split split, int width, int height);
  size_t size() const { return frames.size(); }
};

struct MetricsRow {
  std::string stage;
  int epoch = 0;
  int step = 0;
  double d_loss = 0.0;
  double g_gan = 0.0;
  double g_fm = 0.0;
  double g_perceptual = 0.0;
  double g_total = 0.0;
};

// Append-only metrics rows, optionally mirrored to a TSV file.
class MetricsLog {
 public:
  MetricsLog() = default;
  explicit MetricsLog(std::string path) : path_(std::move(path)) {}

  void add(const MetricsRow& row);
  const std::vector<MetricsRow>& rows() const { return rows_; }
  double epoch_mean_total(const std::string& stage, int epoch) const;

 private:
  std::vector<MetricsRow> rows_;
  std::string path_;
  bool wrote_header_ = false;
};

struct TrainHooks {
  // Observes the previous-frame conditioning input of every generator call.
  std::function<void(const FTensor& prev, bool first_of_pair)> on_generator_input;
};

// Runs one training stage. Stage ordering is enforced (global before local
// before face); the face stage trains only the face networks against frozen
// G and D. Deterministic given config.seed (single-threaded). A checkpoint
// is written per epoch when checkpoint_dir is non-empty.
void train(ModelBundle& bundle, const DatasetManifest& manifest, const TrainConfig& config,
           MetricsLog* log = nullptr, const std::string& checkpoint_dir = "",
           const TrainHooks* hooks = nullptr);

enum class ScheduleTier { paper, toy };

// Stage schedule: paper tier trains global 512x256 for 5 epochs, local
// 1024x512 for 30, face for 5; toy tier is the scaled-down preset.
std::vector<TrainConfig> paper_schedule(ScheduleTier tier);

}  // namespace retarget
