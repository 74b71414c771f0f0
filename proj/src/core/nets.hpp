// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/image.hpp"
#include "core/nn/ops.hpp"
#include "core/nn/params.hpp"

namespace retarget {

using FNode = nn::NodePtr<float>;
using FTensor = nn::Tensor<float>;

// [1,3,H,W] tensor from one image, or a batch from several.
FTensor image_to_tensor(const Image& image);
FTensor images_to_batch(const std::vector<const Image*>& images);
Image tensor_to_image(const FTensor& tensor, int sample = 0);
FTensor zero_image_tensor(int n, int channels, int height, int width);

namespace nets {

struct Conv2d {
  FNode w, b;
  int stride = 1, pad = 0;
  FNode operator()(const FNode& x) const { return nn::conv2d(x, w, b, stride, pad); }
};

struct ConvTranspose2d {
  FNode w, b;
  int stride = 2, pad = 1, out_pad = 1;
  FNode operator()(const FNode& x) const {
    return nn::conv_transpose2d(x, w, b, stride, pad, out_pad);
  }
};

Conv2d make_conv(nn::ParamStore<float>& store, const std::string& name, int cin, int cout, int k,
                 int stride, int pad);
ConvTranspose2d make_conv_transpose(nn::ParamStore<float>& store, const std::string& name,
                                    int cin, int cout, int k, int stride, int pad, int out_pad);

// Encoder / residual stack / decoder translation network: c7s1 stem,
// strided downsampling, residual blocks at the bottleneck width, transposed
// convolution upsampling, tanh head.
class GlobalGenerator {
 public:
  GlobalGenerator() = default;
  GlobalGenerator(nn::ParamStore<float>& store, const std::string& prefix, int in_channels,
                  int out_channels, int base_width, int n_downsamples, int n_res_blocks);

  FNode forward(const FNode& x) const { return head(features(x)); }
  // Pre-head feature map (base_width channels at input resolution).
  FNode features(const FNode& x) const;
  FNode head(const FNode& features) const;
  int feature_channels() const { return base_width_; }

  struct ResBlock {
    Conv2d c0, c1;
  };

 private:
  Conv2d stem_;
  std::vector<Conv2d> downs_;
  std::vector<ResBlock> res_;
  std::vector<ConvTranspose2d> ups_;
  Conv2d head_;
  int base_width_ = 0;
};

// Fine-stage wrapper: runs the global generator on a half-resolution input,
// merges its features with a full-resolution branch, and decodes at full
// resolution.
class LocalEnhancer {
 public:
  LocalEnhancer() = default;
  LocalEnhancer(nn::ParamStore<float>& store, const std::string& prefix,
                const GlobalGenerator* global, int in_channels, int out_channels,
                int n_res_blocks);

  FNode forward(const FNode& x_full) const;

 private:
  const GlobalGenerator* global_ = nullptr;
  Conv2d stem_, down_;
  std::vector<GlobalGenerator::ResBlock> res_;
  ConvTranspose2d up_;
  Conv2d head_;

  friend class GlobalGenerator;
};

// Main generator G: maps (pose stick figure, previously generated frame) to
// a frame. The previous frame is the all-zero image for the first frame of a
// pair and in frame-by-frame mode.
class Generator {
 public:
  Generator(nn::ParamStore<float>& store, const ArchConfig& arch);

  FNode forward(const FNode& pose_image, const FNode& prev_frame) const;
  void promote_to_local(nn::ParamStore<float>& store);
  bool is_local() const { return local_.has_value(); }

  static constexpr int input_channels = 6;

 private:
  ArchConfig arch_;
  GlobalGenerator global_;
  std::optional<LocalEnhancer> local_;
};

struct DiscriminatorOutput {
  FNode logits;                 // patch logit map
  std::vector<FNode> features;  // post-activation maps, one per conv layer
};

// PatchGAN discriminator; d_layers strided convs give the 70x70 receptive
// field at the default depth.
class PatchDiscriminator {
 public:
  PatchDiscriminator() = default;
  PatchDiscriminator(nn::ParamStore<float>& store, const std::string& prefix, int in_channels,
                     int base_width, int n_layers);

  DiscriminatorOutput forward(const FNode& x) const;

 private:
  std::vector<Conv2d> convs_;
  Conv2d out_;
};

// D = (D_1, ..., D_k), each operating on an input downsampled by a further
// factor of two. Index 0 is the coarsest scale so that adding a finer scale
// (for the local stage) leaves existing parameter names unchanged.
class MultiScaleDiscriminator {
 public:
  MultiScaleDiscriminator(nn::ParamStore<float>& store, const std::string& prefix,
                          int in_channels, int base_width, int n_layers, int n_scales);

  std::vector<DiscriminatorOutput> forward(const FNode& x) const;
  void add_finer_scale(nn::ParamStore<float>& store);
  int n_scales() const { return static_cast<int>(scales_.size()); }

 private:
  std::string prefix_;
  int in_channels_ = 0, base_width_ = 0, n_layers_ = 0;
  std::vector<PatchDiscriminator> scales_;
};

// Discriminator conv stack with a global-average-pooled fully connected
// head; one logit per sample, any input resolution.
class FakeDetectorNet {
 public:
  FakeDetectorNet() = default;
  FakeDetectorNet(nn::ParamStore<float>& store, const std::string& prefix, int in_channels,
                  int base_width, int n_layers);

  FNode forward_logit(const FNode& x) const;  // [N,1]

 private:
  std::vector<Conv2d> convs_;
  FNode fc_w_, fc_b_;
};

}  // namespace nets

// Every network of the pipeline plus checkpoint metadata. Parameter stores
// are per-network so stages can be optimized and frozen independently.
struct ModelBundle {
  ArchConfig arch;
  Mode mode = Mode::fbf_ts_fg;
  uint64_t seed = 0;
  int epoch = 0;
  bool global_done = false;
  bool local_done = false;
  bool face_done = false;

  nn::ParamStore<float> g_store, d_store, fg_store, fd_store, det_store;
  std::unique_ptr<nets::Generator> G;
  std::unique_ptr<nets::MultiScaleDiscriminator> D;
  std::unique_ptr<nets::GlobalGenerator> G_f;
  std::unique_ptr<nets::PatchDiscriminator> D_f;
  std::unique_ptr<nets::FakeDetectorNet> detector;

  static std::unique_ptr<ModelBundle> create(const ArchConfig& arch, Mode mode, uint64_t seed);

  // Switches the generator to the fine (local) tier and adds a finer
  // discriminator scale; existing weights are kept.
  void promote_to_local();

  int discriminator_in_channels() const { return mode_is_temporal(mode) ? 12 : 6; }

  // Inference-mode single forward passes (no gradients).
  Image generator_forward(const Image& pose_image, const Image& prev_frame) const;
  Image face_generator_forward(const Image& pose_patch, const Image& face_patch) const;
  double fake_detector_forward(const Image& frame_a, const Image& frame_b) const;

  // Sequential generation over a clip: frame t is conditioned on generated
  // frame t-1 (the all-zero image at t=0 and, in frame-by-frame mode, at
  // every t). The hook observes the conditioning input of each call.
  std::vector<Image> generate_sequence(
      const std::vector<Image>& pose_images, Mode mode,
      const std::function<void(size_t frame, const Image& prev)>& on_input = nullptr) const;
};

}  // namespace retarget
