// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "core/error.hpp"
#include "core/kv.hpp"

namespace retarget {

enum class Stage { global_stage, local_stage, face_stage };
enum class Mode { fbf, fbf_ts, fbf_ts_fg };
enum class GanMode { log_loss, least_squares };

const char* stage_name(Stage s);
Stage stage_from(const std::string& s);
const char* mode_name(Mode m);
Mode mode_from(const std::string& s);

inline bool mode_is_temporal(Mode m) { return m != Mode::fbf; }
inline bool mode_has_face(Mode m) { return m == Mode::fbf_ts_fg; }

// Architecture of every network in a bundle. The defaults follow the base
// single-image translation design this work extends.
struct ArchConfig {
  int base_width = 64;
  int n_downsamples = 4;
  int n_residual_blocks = 9;
  int n_discriminator_scales = 3;
  int image_width = 512;
  int image_height = 256;
  int face_size = 128;
  Stage stage = Stage::global_stage;  // generator tier: global or local

  // Local enhancer branch (used when stage == local_stage).
  int n_local_residual_blocks = 3;

  // Face generator (same topology as the global generator).
  int face_base_width = 64;
  int face_downsamples = 4;
  int face_residual_blocks = 9;

  // Patch discriminators: conv depth 3 gives the 70x70 receptive field.
  int d_layers = 3;

  // Perceptual feature extractor.
  int extractor_base_width = 64;
  bool extractor_full_depth = true;  // five-block deep stack vs one conv per block

  void validate() const;

  static ArchConfig paper_preset();
  // Small enough for CPU test runs: 128x64 images, thin networks.
  static ArchConfig toy_preset();

  void to_kv(KeyValueFile& kv, const std::string& prefix) const;
  static ArchConfig from_kv(const KeyValueFile& kv, const std::string& prefix);
};

struct LossWeights {
  double lambda_fm = 10.0;
  double lambda_p_global = 5.0;
  double lambda_p_local = 10.0;
  GanMode gan_mode = GanMode::log_loss;

  double lambda_p(Stage stage) const {
    return stage == Stage::local_stage ? lambda_p_local : lambda_p_global;
  }
  void validate() const {
    if (lambda_fm < 0 || lambda_p_global < 0 || lambda_p_local < 0)
      fail(ErrorCode::invalid_config, "loss weights must be >= 0");
  }
};

struct OptimizerParams {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  Stage stage = Stage::global_stage;
  int epochs = 1;
  int width = 512;
  int height = 256;
  int batch_size = 1;
  uint64_t seed = 1;
  Mode mode = Mode::fbf_ts_fg;
  int stride = 1;  // temporal pair stride, in frames
  OptimizerParams optim;
  LossWeights weights;

  void validate() const;
};

}  // namespace retarget
