// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/image.hpp"

namespace fs = std::filesystem;

namespace retarget {

namespace {

constexpr const char* kHeader = "retarget-manifest";
constexpr int kFormatVersion = 1;

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "-";
  }
}

Split split_from(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "-") return Split::unassigned;
  fail(ErrorCode::malformed_input, "unknown split tag: " + s);
}

// frame_000123 -> 123; returns false when the stem does not match.
bool parse_indexed_name(const std::string& stem, const std::string& prefix,
                        const std::string& suffix, int64_t* index) {
  if (stem.size() <= prefix.size() + suffix.size()) return false;
  if (stem.compare(0, prefix.size(), prefix) != 0) return false;
  if (stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
  const std::string digits =
      stem.substr(prefix.size(), stem.size() - prefix.size() - suffix.size());
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return false;
  *index = std::stoll(digits);
  return true;
}

}  // namespace

void DatasetManifest::validate() const {
  for (size_t i = 1; i < entries.size(); ++i)
    if (entries[i].frame_index <= entries[i - 1].frame_index)
      fail(ErrorCode::index_mismatch, "manifest frame indices not strictly increasing");
}

size_t DatasetManifest::count_usable() const {
  size_t n = 0;
  for (const auto& e : entries) n += e.usable ? 1 : 0;
  return n;
}

std::vector<const ManifestEntry*> DatasetManifest::usable_entries(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.usable && (split == Split::unassigned || e.split == split)) out.push_back(&e);
  return out;
}

DatasetManifest ingest_dataset(const std::string& frames_dir, const std::string& poses_dir,
                               double fps, int downsample, const std::string& subject_id) {
  if (downsample < 1) fail(ErrorCode::invalid_config, "downsample factor must be >= 1");
  if (fps <= 0.0) fail(ErrorCode::invalid_config, "fps must be positive");
  if (!fs::is_directory(frames_dir)) fail(ErrorCode::no_frames, "not a directory: " + frames_dir);

  std::map<int64_t, std::string> frames;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".png" && ext != ".ppm") continue;
    int64_t index = 0;
    if (!parse_indexed_name(entry.path().stem().string(), "frame_", "", &index)) continue;
    if (frames.count(index))
      fail(ErrorCode::index_mismatch,
           "duplicate frame index " + std::to_string(index) + " in " + frames_dir);
    frames[index] = entry.path().string();
  }
  if (frames.empty()) fail(ErrorCode::no_frames, "no frame files in " + frames_dir);

  std::map<int64_t, std::string> poses;
  if (fs::is_directory(poses_dir)) {
    for (const auto& entry : fs::directory_iterator(poses_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      int64_t index = 0;
      if (!parse_indexed_name(entry.path().stem().string(), "frame_", "_keypoints", &index))
        continue;
      poses[index] = entry.path().string();
    }
  }

  DatasetManifest manifest;
  manifest.subject_id = subject_id;
  manifest.fps = fps / downsample;

  int64_t position = 0;
  for (const auto& [index, frame_path] : frames) {
    const bool keep = (position++ % downsample) == 0;
    if (!keep) continue;
    ManifestEntry e;
    e.frame_index = index;
    e.frame_path = frame_path;
    auto pose_it = poses.find(index);
    if (pose_it == poses.end()) {
      e.usable = false;
    } else {
      e.pose_path = pose_it->second;
      // A pose file that exists but cannot be parsed also makes the frame
      // unusable; keep the path for diagnostics.
      try {
        std::ifstream in(pose_it->second);
        std::ostringstream buf;
        buf << in.rdbuf();
        parse_detector_frame(buf.str(), SkeletonTopology::body25());
      } catch (const Error&) {
        e.usable = false;
      }
    }
    manifest.entries.push_back(std::move(e));
  }

  // Resolution from the first frame on disk.
  const Image first = load_image(manifest.entries.front().frame_path);
  manifest.width = first.width;
  manifest.height = first.height;
  manifest.validate();
  return manifest;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    fail(ErrorCode::invalid_fraction,
         "train fraction must be in (0,1), got " + std::to_string(train_fraction));
  DatasetManifest out = manifest;
  const size_t n = out.entries.size();
  const size_t n_train = static_cast<size_t>(
      std::floor(static_cast<double>(n) * train_fraction));
  for (size_t i = 0; i < n; ++i)
    out.entries[i].split = i < n_train ? Split::train : Split::test;
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  manifest.validate();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorCode::io_error, "cannot write " + tmp);
    out << kHeader << " " << kFormatVersion << "\n";
    out << "subject\t" << manifest.subject_id << "\n";
    char fps[64];
    std::snprintf(fps, sizeof(fps), "%.17g", manifest.fps);
    out << "fps\t" << fps << "\n";
    out << "resolution\t" << manifest.width << "\t" << manifest.height << "\n";
    for (const auto& e : manifest.entries)
      out << "entry\t" << e.frame_index << "\t" << e.frame_path << "\t"
          << (e.pose_path.empty() ? "-" : e.pose_path) << "\t" << split_name(e.split) << "\t"
          << (e.usable ? "ok" : "bad") << "\n";
    if (!out) fail(ErrorCode::io_error, "failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::io_error, "cannot rename " + tmp + " to " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::malformed_input, "empty manifest " + path);
  {
    std::istringstream head(line);
    std::string tag;
    int version = 0;
    head >> tag >> version;
    if (tag != kHeader) fail(ErrorCode::malformed_input, "not a manifest file: " + path);
    if (version != kFormatVersion)
      fail(ErrorCode::malformed_input, "unsupported manifest version " + std::to_string(version));
  }

  DatasetManifest manifest;
  auto fields_of = [](const std::string& l) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      const size_t tab = l.find('\t', start);
      fields.push_back(l.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return fields;
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = fields_of(line);
    const std::string& kind = fields[0];
    if (kind == "subject" && fields.size() == 2) {
      manifest.subject_id = fields[1];
    } else if (kind == "fps" && fields.size() == 2) {
      manifest.fps = std::stod(fields[1]);
    } else if (kind == "resolution" && fields.size() == 3) {
      manifest.width = std::stoi(fields[1]);
      manifest.height = std::stoi(fields[2]);
    } else if (kind == "entry" && fields.size() == 6) {
      ManifestEntry e;
      e.frame_index = std::stoll(fields[1]);
      e.frame_path = fields[2];
      e.pose_path = fields[3] == "-" ? "" : fields[3];
      e.split = split_from(fields[4]);
      e.usable = fields[5] == "ok";
      manifest.entries.push_back(std::move(e));
    } else {
      fail(ErrorCode::malformed_input, "bad manifest line: " + line);
    }
  }
  manifest.validate();
  return manifest;
}

PoseSequence manifest_pose_sequence(const DatasetManifest& manifest, Split split) {
  PoseSequence seq;
  seq.fps = manifest.fps;
  for (const auto& e : manifest.entries) {
    if (!e.usable || e.pose_path.empty()) continue;
    if (split != Split::unassigned && e.split != split) continue;
    std::ifstream in(e.pose_path);
    if (!in) fail(ErrorCode::io_error, "cannot open " + e.pose_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    seq.poses.push_back(parse_detector_frame(buf.str(), SkeletonTopology::body25()));
    seq.frame_indices.push_back(e.frame_index);
  }
  seq.validate();
  return seq;
}

std::string frame_file_name(int64_t index, const std::string& extension) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%06lld%s", static_cast<long long>(index),
                extension.c_str());
  return buf;
}

std::string pose_file_name(int64_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%06lld_keypoints.json", static_cast<long long>(index));
  return buf;
}

}  // namespace retarget
