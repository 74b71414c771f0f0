// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/pose.hpp"

namespace retarget {

enum class Split { unassigned, train, test };

struct ManifestEntry {
  int64_t frame_index = 0;
  std::string frame_path;
  std::string pose_path;
  Split split = Split::unassigned;
  bool usable = true;

  bool operator==(const ManifestEntry&) const = default;
};

// Ordered frame/pose pairing for one subject's footage.
struct DatasetManifest {
  std::string subject_id;
  double fps = 0.0;
  int width = 0;
  int height = 0;
  std::vector<ManifestEntry> entries;

  bool operator==(const DatasetManifest&) const = default;

  void validate() const;
  size_t count_usable() const;
  std::vector<const ManifestEntry*> usable_entries(Split split) const;
};

// Pairs index-aligned files from a frames directory (frame_XXXXXX.png|.ppm)
// and a poses directory (frame_XXXXXX_keypoints.json). Frames without a
// parseable pose are kept but flagged unusable. downsample keeps every
// factor-th frame (by order) and divides the recorded fps.
DatasetManifest ingest_dataset(const std::string& frames_dir, const std::string& poses_dir,
                               double fps, int downsample, const std::string& subject_id);

// Marks the first floor(N * train_fraction) entries train, the rest test.
// Footage is temporal, so the split is a contiguous prefix, never shuffled.
DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction);

// Line-oriented text format with a versioned header; writes are atomic
// (temp file + rename).
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Poses of the manifest's usable entries (optionally one split only),
// parsed with the default topology.
PoseSequence manifest_pose_sequence(const DatasetManifest& manifest,
                                    Split split = Split::unassigned);

// Zero-padded canonical file names.
std::string frame_file_name(int64_t index, const std::string& extension = ".png");
std::string pose_file_name(int64_t index);

}  // namespace retarget
