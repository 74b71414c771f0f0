// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>

#include "core/config.hpp"
#include "core/nn/ops.hpp"
#include "core/nn/params.hpp"

namespace retarget {

// Five-tap convolutional feature extractor for the perceptual loss. The
// topology mirrors the classification network the loss taps (first conv of
// each of the five blocks, max-pooling in between); channel widths scale
// with base_width so the toy preset stays small. Weights come from a tensor
// file when one is supplied and otherwise from a fixed-seed random
// initialization, which keeps the whole pipeline runnable offline.
template <typename T>
class FeatureExtractor {
 public:
  struct Config {
    int base_width = 64;        // 64 reproduces the reference channel widths
    bool full_depth = true;     // true: 2/2/4/4/1 convs per block; false: 1 each
    uint64_t seed = 0x76676731ULL;
  };

  static FeatureExtractor random_init(const Config& config) {
    FeatureExtractor fx;
    fx.config_ = config;
    fx.store_ = nn::ParamStore<T>(config.seed);
    fx.build();
    return fx;
  }

  static FeatureExtractor for_arch(const ArchConfig& arch) {
    Config c;
    c.base_width = arch.extractor_base_width;
    c.full_depth = arch.extractor_full_depth;
    return random_init(c);
  }

  // Tap activations, shallowest to deepest. Input is an image batch in
  // [-1,1]; it is shifted to [0,1] and channel-standardized first so that
  // externally trained weights drop in unchanged.
  std::array<nn::NodePtr<T>, 5> taps(const nn::NodePtr<T>& image) const {
    std::array<nn::NodePtr<T>, 5> out;
    nn::NodePtr<T> h = nn::channel_affine<T>(
        image, {T(0.5 / 0.229), T(0.5 / 0.224), T(0.5 / 0.225)},
        {T((0.5 - 0.485) / 0.229), T((0.5 - 0.456) / 0.224), T((0.5 - 0.406) / 0.225)});
    int conv_index = 0;
    for (int block = 0; block < 5; ++block) {
      if (block > 0) h = nn::max_pool2d(h, 2, 2);
      const int n_convs = convs_per_block(block);
      for (int i = 0; i < n_convs; ++i) {
        h = nn::relu(nn::conv2d(h, convs_[static_cast<size_t>(conv_index)].w,
                                convs_[static_cast<size_t>(conv_index)].b, 1, 1));
        ++conv_index;
        if (i == 0) out[static_cast<size_t>(block)] = h;
      }
    }
    return out;
  }

  nn::ParamStore<T>& store() { return store_; }
  const nn::ParamStore<T>& store() const { return store_; }

  // Block/tap layout (needed by checkpoint code and tests).
  int convs_per_block(int block) const {
    static constexpr std::array<int, 5> full = {2, 2, 4, 4, 1};
    return config_.full_depth ? full[static_cast<size_t>(block)] : 1;
  }
  int block_channels(int block) const {
    static constexpr std::array<int, 5> mult = {1, 2, 4, 8, 8};
    return config_.base_width * mult[static_cast<size_t>(block)];
  }
  const Config& config() const { return config_; }

 private:
  struct ConvParams {
    nn::NodePtr<T> w, b;
  };

  void build() {
    int cin = 3;
    for (int block = 0; block < 5; ++block) {
      const int cout = block_channels(block);
      for (int i = 0; i < convs_per_block(block); ++i) {
        const std::string name =
            "fx.block" + std::to_string(block) + ".conv" + std::to_string(i);
        ConvParams c;
        c.w = store_.kaiming(name + ".w", {cout, cin, 3, 3});
        c.b = store_.zeros(name + ".b", {cout});
        c.w->requires_grad = false;
        c.b->requires_grad = false;
        convs_.push_back(c);
        cin = cout;
      }
    }
  }

  Config config_;
  nn::ParamStore<T> store_;
  std::vector<ConvParams> convs_;
};

}  // namespace retarget
