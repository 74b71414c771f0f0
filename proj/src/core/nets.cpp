// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/nets.hpp"

#include <cmath>

namespace retarget {

FTensor image_to_tensor(const Image& image) {
  FTensor t({1, image.channels, image.height, image.width});
  std::copy(image.data.begin(), image.data.end(), t.data());
  return t;
}

FTensor images_to_batch(const std::vector<const Image*>& images) {
  if (images.empty()) fail(ErrorCode::empty_dataset, "images_to_batch: no images");
  const Image& first = *images[0];
  FTensor t({static_cast<int>(images.size()), first.channels, first.height, first.width});
  const int64_t sample = static_cast<int64_t>(first.channels) * first.height * first.width;
  for (size_t i = 0; i < images.size(); ++i) {
    if (!images[i]->same_size(first))
      fail(ErrorCode::size_mismatch, "images_to_batch: mixed image sizes");
    std::copy(images[i]->data.begin(), images[i]->data.end(),
              t.data() + static_cast<int64_t>(i) * sample);
  }
  return t;
}

Image tensor_to_image(const FTensor& tensor, int sample) {
  if (tensor.rank() != 4) fail(ErrorCode::shape_mismatch, "tensor_to_image: expected NCHW");
  const int c = tensor.dim(1), h = tensor.dim(2), w = tensor.dim(3);
  Image img(w, h, c);
  const int64_t stride = static_cast<int64_t>(c) * h * w;
  std::copy(tensor.data() + sample * stride, tensor.data() + (sample + 1) * stride,
            img.data.begin());
  return img;
}

FTensor zero_image_tensor(int n, int channels, int height, int width) {
  return FTensor({n, channels, height, width});
}

namespace nets {

namespace {
constexpr float kInitStd = 0.02f;
constexpr float kLeakySlope = 0.2f;

FNode in_relu(const FNode& x) { return nn::relu(nn::instance_norm(x)); }
}  // namespace

Conv2d make_conv(nn::ParamStore<float>& store, const std::string& name, int cin, int cout, int k,
                 int stride, int pad) {
  Conv2d conv;
  conv.w = store.normal(name + ".w", {cout, cin, k, k}, kInitStd);
  conv.b = store.zeros(name + ".b", {cout});
  conv.stride = stride;
  conv.pad = pad;
  return conv;
}

ConvTranspose2d make_conv_transpose(nn::ParamStore<float>& store, const std::string& name,
                                    int cin, int cout, int k, int stride, int pad, int out_pad) {
  ConvTranspose2d conv;
  conv.w = store.normal(name + ".w", {cin, cout, k, k}, kInitStd);
  conv.b = store.zeros(name + ".b", {cout});
  conv.stride = stride;
  conv.pad = pad;
  conv.out_pad = out_pad;
  return conv;
}

GlobalGenerator::GlobalGenerator(nn::ParamStore<float>& store, const std::string& prefix,
                                 int in_channels, int out_channels, int base_width,
                                 int n_downsamples, int n_res_blocks)
    : base_width_(base_width) {
  stem_ = make_conv(store, prefix + ".stem", in_channels, base_width, 7, 1, 0);
  int ch = base_width;
  for (int i = 0; i < n_downsamples; ++i) {
    downs_.push_back(make_conv(store, prefix + ".down" + std::to_string(i), ch, ch * 2, 3, 2, 1));
    ch *= 2;
  }
  for (int i = 0; i < n_res_blocks; ++i) {
    const std::string base = prefix + ".res" + std::to_string(i);
    res_.push_back({make_conv(store, base + ".c0", ch, ch, 3, 1, 0),
                    make_conv(store, base + ".c1", ch, ch, 3, 1, 0)});
  }
  for (int i = 0; i < n_downsamples; ++i) {
    ups_.push_back(
        make_conv_transpose(store, prefix + ".up" + std::to_string(i), ch, ch / 2, 3, 2, 1, 1));
    ch /= 2;
  }
  head_ = make_conv(store, prefix + ".head", ch, out_channels, 7, 1, 0);
}

FNode GlobalGenerator::features(const FNode& x) const {
  FNode h = in_relu(stem_(nn::reflect_pad2d(x, 3)));
  for (const auto& down : downs_) h = in_relu(down(h));
  for (const auto& block : res_) {
    FNode r = in_relu(block.c0(nn::reflect_pad2d(h, 1)));
    r = nn::instance_norm(block.c1(nn::reflect_pad2d(r, 1)));
    h = nn::add(h, r);
  }
  for (const auto& up : ups_) h = in_relu(up(h));
  return h;
}

FNode GlobalGenerator::head(const FNode& features) const {
  return nn::tanh_op(head_(nn::reflect_pad2d(features, 3)));
}

LocalEnhancer::LocalEnhancer(nn::ParamStore<float>& store, const std::string& prefix,
                             const GlobalGenerator* global, int in_channels, int out_channels,
                             int n_res_blocks)
    : global_(global) {
  const int merged = global->feature_channels();
  const int branch = std::max(1, merged / 2);
  stem_ = make_conv(store, prefix + ".stem", in_channels, branch, 7, 1, 0);
  down_ = make_conv(store, prefix + ".down", branch, merged, 3, 2, 1);
  for (int i = 0; i < n_res_blocks; ++i) {
    const std::string base = prefix + ".res" + std::to_string(i);
    res_.push_back({make_conv(store, base + ".c0", merged, merged, 3, 1, 0),
                    make_conv(store, base + ".c1", merged, merged, 3, 1, 0)});
  }
  up_ = make_conv_transpose(store, prefix + ".up", merged, branch, 3, 2, 1, 1);
  head_ = make_conv(store, prefix + ".head", branch, out_channels, 7, 1, 0);
}

FNode LocalEnhancer::forward(const FNode& x_full) const {
  FNode global_features = global_->features(nn::avg_pool2d(x_full, 2, 2));
  FNode h = in_relu(down_(in_relu(stem_(nn::reflect_pad2d(x_full, 3)))));
  h = nn::add(h, global_features);
  for (const auto& block : res_) {
    FNode r = in_relu(block.c0(nn::reflect_pad2d(h, 1)));
    r = nn::instance_norm(block.c1(nn::reflect_pad2d(r, 1)));
    h = nn::add(h, r);
  }
  h = in_relu(up_(h));
  return nn::tanh_op(head_(nn::reflect_pad2d(h, 3)));
}

Generator::Generator(nn::ParamStore<float>& store, const ArchConfig& arch) : arch_(arch) {
  global_ = GlobalGenerator(store, "g", input_channels, 3, arch.base_width, arch.n_downsamples,
                            arch.n_residual_blocks);
  if (arch.stage == Stage::local_stage) promote_to_local(store);
}

void Generator::promote_to_local(nn::ParamStore<float>& store) {
  if (local_.has_value()) return;
  local_.emplace(store, "g.local", &global_, input_channels, 3, arch_.n_local_residual_blocks);
}

FNode Generator::forward(const FNode& pose_image, const FNode& prev_frame) const {
  if (!pose_image->value.same_shape(prev_frame->value))
    fail(ErrorCode::shape_mismatch, "generator: pose and previous frame sizes differ");
  FNode x = nn::concat_channels<float>({pose_image, prev_frame});
  return local_ ? local_->forward(x) : global_.forward(x);
}

PatchDiscriminator::PatchDiscriminator(nn::ParamStore<float>& store, const std::string& prefix,
                                       int in_channels, int base_width, int n_layers) {
  int cin = in_channels;
  int cout = base_width;
  for (int i = 0; i < n_layers; ++i) {
    convs_.push_back(make_conv(store, prefix + ".layer" + std::to_string(i), cin, cout, 4, 2, 1));
    cin = cout;
    cout = cout * 2;
  }
  convs_.push_back(make_conv(store, prefix + ".layer" + std::to_string(n_layers), cin, cout, 4, 1, 1));
  out_ = make_conv(store, prefix + ".out", cout, 1, 4, 1, 1);
}

DiscriminatorOutput PatchDiscriminator::forward(const FNode& x) const {
  DiscriminatorOutput out;
  FNode h = x;
  for (size_t i = 0; i < convs_.size(); ++i) {
    h = convs_[i](h);
    if (i > 0) h = nn::instance_norm(h);
    h = nn::leaky_relu(h, kLeakySlope);
    out.features.push_back(h);
  }
  out.logits = out_(h);
  return out;
}

MultiScaleDiscriminator::MultiScaleDiscriminator(nn::ParamStore<float>& store,
                                                 const std::string& prefix, int in_channels,
                                                 int base_width, int n_layers, int n_scales)
    : prefix_(prefix), in_channels_(in_channels), base_width_(base_width), n_layers_(n_layers) {
  if (n_scales < 1) fail(ErrorCode::invalid_config, "need at least one discriminator scale");
  for (int i = 0; i < n_scales; ++i)
    scales_.emplace_back(store, prefix_ + ".scale" + std::to_string(i), in_channels, base_width,
                         n_layers);
}

void MultiScaleDiscriminator::add_finer_scale(nn::ParamStore<float>& store) {
  scales_.emplace_back(store, prefix_ + ".scale" + std::to_string(scales_.size()), in_channels_,
                       base_width_, n_layers_);
}

std::vector<DiscriminatorOutput> MultiScaleDiscriminator::forward(const FNode& x) const {
  // Pyramid from finest (input) to coarsest; scale 0 sees the coarsest.
  std::vector<FNode> pyramid{x};
  for (size_t i = 1; i < scales_.size(); ++i)
    pyramid.push_back(nn::avg_pool2d(pyramid.back(), 2, 2));
  std::vector<DiscriminatorOutput> outputs;
  outputs.reserve(scales_.size());
  for (size_t i = 0; i < scales_.size(); ++i)
    outputs.push_back(scales_[i].forward(pyramid[scales_.size() - 1 - i]));
  return outputs;
}

FakeDetectorNet::FakeDetectorNet(nn::ParamStore<float>& store, const std::string& prefix,
                                 int in_channels, int base_width, int n_layers) {
  int cin = in_channels;
  int cout = base_width;
  for (int i = 0; i < n_layers; ++i) {
    convs_.push_back(make_conv(store, prefix + ".layer" + std::to_string(i), cin, cout, 4, 2, 1));
    cin = cout;
    cout = cout * 2;
  }
  convs_.push_back(make_conv(store, prefix + ".layer" + std::to_string(n_layers), cin, cout, 4, 1, 1));
  fc_w_ = store.normal(prefix + ".fc.w", {1, cout}, kInitStd);
  fc_b_ = store.zeros(prefix + ".fc.b", {1});
}

FNode FakeDetectorNet::forward_logit(const FNode& x) const {
  FNode h = x;
  for (size_t i = 0; i < convs_.size(); ++i) {
    h = convs_[i](h);
    if (i > 0) h = nn::instance_norm(h);
    h = nn::leaky_relu(h, kLeakySlope);
  }
  return nn::linear(nn::global_avg_pool(h), fc_w_, fc_b_);
}

}  // namespace nets

std::unique_ptr<ModelBundle> ModelBundle::create(const ArchConfig& arch, Mode mode,
                                                 uint64_t seed) {
  arch.validate();
  auto bundle = std::make_unique<ModelBundle>();
  bundle->arch = arch;
  bundle->mode = mode;
  bundle->seed = seed;
  bundle->g_store = nn::ParamStore<float>(seed ^ 0x67656e65ULL);
  bundle->d_store = nn::ParamStore<float>(seed ^ 0x64697363ULL);
  bundle->fg_store = nn::ParamStore<float>(seed ^ 0x66616365ULL);
  bundle->fd_store = nn::ParamStore<float>(seed ^ 0x66646973ULL);
  bundle->det_store = nn::ParamStore<float>(seed ^ 0x64657463ULL);

  bundle->G = std::make_unique<nets::Generator>(bundle->g_store, arch);
  bundle->D = std::make_unique<nets::MultiScaleDiscriminator>(
      bundle->d_store, "d", bundle->discriminator_in_channels(), arch.base_width, arch.d_layers,
      arch.n_discriminator_scales);
  bundle->G_f = std::make_unique<nets::GlobalGenerator>(bundle->fg_store, "fg", 6, 3,
                                                        arch.face_base_width,
                                                        arch.face_downsamples,
                                                        arch.face_residual_blocks);
  bundle->D_f = std::make_unique<nets::PatchDiscriminator>(bundle->fd_store, "fd", 6,
                                                           arch.face_base_width, arch.d_layers);
  bundle->detector = std::make_unique<nets::FakeDetectorNet>(bundle->det_store, "det", 6,
                                                             arch.base_width, arch.d_layers);
  return bundle;
}

void ModelBundle::promote_to_local() {
  if (arch.stage == Stage::local_stage && G->is_local()) return;
  arch.stage = Stage::local_stage;
  arch.image_width *= 2;
  arch.image_height *= 2;
  G->promote_to_local(g_store);
  D->add_finer_scale(d_store);
}

Image ModelBundle::generator_forward(const Image& pose_image, const Image& prev_frame) const {
  auto pose = nn::make_leaf(image_to_tensor(pose_image));
  auto prev = nn::make_leaf(image_to_tensor(prev_frame));
  return tensor_to_image(G->forward(pose, prev)->value);
}

Image ModelBundle::face_generator_forward(const Image& pose_patch, const Image& face_patch) const {
  auto a = nn::make_leaf(image_to_tensor(pose_patch));
  auto b = nn::make_leaf(image_to_tensor(face_patch));
  return tensor_to_image(G_f->forward(nn::concat_channels<float>({a, b}))->value);
}

std::vector<Image> ModelBundle::generate_sequence(
    const std::vector<Image>& pose_images, Mode mode,
    const std::function<void(size_t frame, const Image& prev)>& on_input) const {
  std::vector<Image> out;
  out.reserve(pose_images.size());
  Image prev;
  for (size_t i = 0; i < pose_images.size(); ++i) {
    const Image& pose = pose_images[i];
    if (i == 0 || !mode_is_temporal(mode))
      prev = Image(pose.width, pose.height, 3, 0.0f);  // the zero image z
    if (on_input) on_input(i, prev);
    prev = generator_forward(pose, prev);
    out.push_back(prev);
  }
  return out;
}

double ModelBundle::fake_detector_forward(const Image& frame_a, const Image& frame_b) const {
  auto a = nn::make_leaf(image_to_tensor(frame_a));
  auto b = nn::make_leaf(image_to_tensor(frame_b));
  auto logit = detector->forward_logit(nn::concat_channels<float>({a, b}));
  return 1.0 / (1.0 + std::exp(-static_cast<double>(logit->value[0])));
}

}  // namespace retarget
