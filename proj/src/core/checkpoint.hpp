// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "core/nets.hpp"

namespace retarget {

// Self-describing checkpoint container: a JSON header (format version, kind,
// metadata, tensor directory) followed by raw little-endian float32 data.
// Readers ignore unknown header fields, so the format is forward and
// backward compatible within a major version.
struct TensorFile {
  nlohmann::json meta;
  std::map<std::string, nn::Tensor<float>> tensors;
};

void save_tensor_file(const std::string& path, const nlohmann::json& meta,
                      const std::vector<std::pair<std::string, const nn::Tensor<float>*>>& tensors);
TensorFile load_tensor_file(const std::string& path);

// Copies tensors into a parameter store by name. Missing names are an error;
// extra tensors in the file are ignored.
void load_store(nn::ParamStore<float>& store, const TensorFile& file);

// Whole-bundle checkpoints (kind = "model").
void save_model_bundle(const ModelBundle& bundle, const std::string& path);
std::unique_ptr<ModelBundle> load_model_bundle(const std::string& path);

// Standalone fake-detector checkpoints (kind = "detector").
struct DetectorModel {
  int base_width = 16;
  int n_layers = 3;
  int width = 128;
  int height = 64;
  uint64_t seed = 0;
  nn::ParamStore<float> store;
  std::unique_ptr<nets::FakeDetectorNet> net;

  static std::unique_ptr<DetectorModel> create(int base_width, int n_layers, int width,
                                               int height, uint64_t seed);
  double pair_probability_real(const Image& a, const Image& b) const;
};

void save_detector(const DetectorModel& model, const std::string& path);
std::unique_ptr<DetectorModel> load_detector(const std::string& path);

}  // namespace retarget
