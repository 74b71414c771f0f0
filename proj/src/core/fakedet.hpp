// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/manifest.hpp"

namespace retarget {

// One labeled pair of consecutive frames.
struct FakePairSample {
  std::string frame_a, frame_b;
  bool real = true;
  std::string subject;
  Split split = Split::train;
};

struct FakePairDataset {
  std::vector<FakePairSample> pairs;

  size_t count(Split split, bool real) const;
  void save(const std::string& path) const;
  static FakePairDataset load(const std::string& path);
};

// Builds a balanced labeled pair set from real footage manifests and
// manifests of synthesized frames. Subjects listed in test_subjects form a
// disjoint held-out split. Within each split the larger class is
// downsampled (evenly strided) so the class ratio is at most max_ratio.
FakePairDataset build_fake_dataset(const std::vector<DatasetManifest>& real_manifests,
                                   const std::vector<DatasetManifest>& fake_manifests,
                                   int stride, const std::vector<std::string>& test_subjects,
                                   double max_ratio = 1.0);

struct DetectorTrainConfig {
  int epochs = 10;
  int batch_size = 4;
  uint64_t seed = 1;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int width = 128;
  int height = 64;
  int base_width = 16;
  int n_layers = 3;
};

struct DetectorMetrics {
  std::vector<double> epoch_losses;
  double heldout_accuracy = 0.0;
  int n_heldout_pairs = 0;
};

// Binary cross-entropy training of the pair classifier; reports held-out
// pair accuracy when the dataset has a test split.
std::unique_ptr<DetectorModel> train_fake_detector(const FakePairDataset& dataset,
                                                   const DetectorTrainConfig& config,
                                                   DetectorMetrics* metrics = nullptr);

struct VideoClassification {
  double video_probability_real = 0.0;  // product of pair probabilities
  std::vector<double> pair_probabilities;
  bool label_real = false;  // product rule on p vs (1-p), i.e. mean log odds
  double mean_log_odds = 0.0;
};

// The video-level decision rule on its own: pair probabilities are clamped
// to [1e-6, 1-1e-6], multiplied in log space, and the video is labeled real
// when the product of p(real) beats the product of p(fake).
VideoClassification combine_pair_probabilities(const std::vector<double>& pair_probs);

// Per-pair probabilities from the detector, combined as above.
VideoClassification classify_video(const std::vector<Image>& frames,
                                   const DetectorModel& detector);

void save_classification_report(const VideoClassification& result, const std::string& path);

}  // namespace retarget
