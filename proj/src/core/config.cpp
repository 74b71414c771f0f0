// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

namespace retarget {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::global_stage: return "global";
    case Stage::local_stage: return "local";
    case Stage::face_stage: return "face";
  }
  return "?";
}

Stage stage_from(const std::string& s) {
  if (s == "global") return Stage::global_stage;
  if (s == "local") return Stage::local_stage;
  if (s == "face") return Stage::face_stage;
  fail(ErrorCode::invalid_config, "unknown stage: " + s);
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::fbf: return "fbf";
    case Mode::fbf_ts: return "fbf-ts";
    case Mode::fbf_ts_fg: return "fbf-ts-fg";
  }
  return "?";
}

Mode mode_from(const std::string& s) {
  if (s == "fbf") return Mode::fbf;
  if (s == "fbf-ts" || s == "fbf_ts") return Mode::fbf_ts;
  if (s == "fbf-ts-fg" || s == "fbf_ts_fg") return Mode::fbf_ts_fg;
  fail(ErrorCode::invalid_config, "unknown mode: " + s);
}

void ArchConfig::validate() const {
  if (n_discriminator_scales < 1)
    fail(ErrorCode::invalid_config, "need at least one discriminator scale");
  if (base_width < 1 || face_base_width < 1 || extractor_base_width < 1)
    fail(ErrorCode::invalid_config, "network widths must be positive");
  if (n_downsamples < 1 || d_layers < 1)
    fail(ErrorCode::invalid_config, "network depths must be positive");
  const int div = 1 << n_downsamples;
  if (image_width % div != 0 || image_height % div != 0)
    fail(ErrorCode::invalid_config,
         "image dimensions must be divisible by 2^n_downsamples = " + std::to_string(div));
  if (face_size < (1 << face_downsamples))
    fail(ErrorCode::invalid_config, "face_size too small for face_downsamples");
  if (face_size > image_width || face_size > image_height)
    fail(ErrorCode::invalid_config, "face_size larger than the image");
}

ArchConfig ArchConfig::paper_preset() {
  ArchConfig a;  // defaults are the paper-scale configuration
  a.validate();
  return a;
}

ArchConfig ArchConfig::toy_preset() {
  ArchConfig a;
  a.base_width = 16;
  a.n_downsamples = 2;
  a.n_residual_blocks = 2;
  a.n_discriminator_scales = 2;
  a.image_width = 128;
  a.image_height = 64;
  a.face_size = 32;
  a.n_local_residual_blocks = 1;
  a.face_base_width = 16;
  a.face_downsamples = 2;
  a.face_residual_blocks = 1;
  a.extractor_base_width = 8;
  a.extractor_full_depth = false;
  a.validate();
  return a;
}

void ArchConfig::to_kv(KeyValueFile& kv, const std::string& prefix) const {
  kv.set_int(prefix + "base_width", base_width);
  kv.set_int(prefix + "n_downsamples", n_downsamples);
  kv.set_int(prefix + "n_residual_blocks", n_residual_blocks);
  kv.set_int(prefix + "n_discriminator_scales", n_discriminator_scales);
  kv.set_int(prefix + "image_width", image_width);
  kv.set_int(prefix + "image_height", image_height);
  kv.set_int(prefix + "face_size", face_size);
  kv.set(prefix + "stage", stage_name(stage));
  kv.set_int(prefix + "n_local_residual_blocks", n_local_residual_blocks);
  kv.set_int(prefix + "face_base_width", face_base_width);
  kv.set_int(prefix + "face_downsamples", face_downsamples);
  kv.set_int(prefix + "face_residual_blocks", face_residual_blocks);
  kv.set_int(prefix + "d_layers", d_layers);
  kv.set_int(prefix + "extractor_base_width", extractor_base_width);
  kv.set(prefix + "extractor_full_depth", extractor_full_depth ? "true" : "false");
}

ArchConfig ArchConfig::from_kv(const KeyValueFile& kv, const std::string& prefix) {
  ArchConfig a;
  a.base_width = static_cast<int>(kv.get_int_or(prefix + "base_width", a.base_width));
  a.n_downsamples = static_cast<int>(kv.get_int_or(prefix + "n_downsamples", a.n_downsamples));
  a.n_residual_blocks =
      static_cast<int>(kv.get_int_or(prefix + "n_residual_blocks", a.n_residual_blocks));
  a.n_discriminator_scales = static_cast<int>(
      kv.get_int_or(prefix + "n_discriminator_scales", a.n_discriminator_scales));
  a.image_width = static_cast<int>(kv.get_int_or(prefix + "image_width", a.image_width));
  a.image_height = static_cast<int>(kv.get_int_or(prefix + "image_height", a.image_height));
  a.face_size = static_cast<int>(kv.get_int_or(prefix + "face_size", a.face_size));
  a.stage = stage_from(kv.get_or(prefix + "stage", stage_name(a.stage)));
  a.n_local_residual_blocks = static_cast<int>(
      kv.get_int_or(prefix + "n_local_residual_blocks", a.n_local_residual_blocks));
  a.face_base_width =
      static_cast<int>(kv.get_int_or(prefix + "face_base_width", a.face_base_width));
  a.face_downsamples =
      static_cast<int>(kv.get_int_or(prefix + "face_downsamples", a.face_downsamples));
  a.face_residual_blocks =
      static_cast<int>(kv.get_int_or(prefix + "face_residual_blocks", a.face_residual_blocks));
  a.d_layers = static_cast<int>(kv.get_int_or(prefix + "d_layers", a.d_layers));
  a.extractor_base_width =
      static_cast<int>(kv.get_int_or(prefix + "extractor_base_width", a.extractor_base_width));
  a.extractor_full_depth = kv.get_bool_or(prefix + "extractor_full_depth", a.extractor_full_depth);
  a.validate();
  return a;
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::invalid_config, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::invalid_config, "batch_size must be >= 1");
  if (stride < 1) fail(ErrorCode::invalid_config, "stride must be >= 1");
  if (stage == Stage::face_stage && !mode_has_face(mode))
    fail(ErrorCode::invalid_config,
         std::string("mode ") + mode_name(mode) + " has no face stage");
  weights.validate();
}

}  // namespace retarget
