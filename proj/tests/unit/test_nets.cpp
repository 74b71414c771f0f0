// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/losses.hpp"
#include "core/nets.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

Image random_image(int w, int h, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Image img(w, h, 3);
  for (auto& v : img.data) v = u(rng);
  return img;
}

bool all_finite(const Image& img) {
  for (float v : img.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("generator: shape contract, zero placeholder, determinism") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 7);
  const Image pose = random_image(128, 64, 1);
  const Image prev = random_image(128, 64, 2);
  const Image out = bundle->generator_forward(pose, prev);
  CHECK(out.width == 128);
  CHECK(out.height == 64);
  CHECK(out.channels == 3);
  for (float v : out.data) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }

  // First-frame case: the all-zero placeholder is a valid conditioning input.
  const Image zeros(128, 64, 3, 0.0f);
  CHECK(all_finite(bundle->generator_forward(pose, zeros)));

  const Image again = bundle->generator_forward(pose, prev);
  CHECK(out.data == again.data);  // bit-identical

  CHECK_THROWS_AS(bundle->generator_forward(random_image(64, 32, 3), prev), Error);
}

TEST_CASE("discriminator: multi-scale contract and feature taps") {
  const ArchConfig arch = ArchConfig::toy_preset();
  auto bundle = ModelBundle::create(arch, Mode::fbf_ts_fg, 7);
  auto input = nn::make_leaf(image_to_tensor(random_image(128, 64, 4)));
  // Temporal conditioning: 4 RGB images concatenated.
  auto x = nn::concat_channels<float>({input, input, input, input});
  const auto outs = bundle->D->forward(x);
  REQUIRE(static_cast<int>(outs.size()) == arch.n_discriminator_scales);
  for (const auto& o : outs) {
    CHECK(!o.features.empty());
    CHECK(o.logits->value.dim(1) == 1);
  }
  // The input pyramid halves per scale: first-layer activations of the
  // finest scale are twice the size of the next one.
  const auto& fine = outs.back().features[0]->value;
  const auto& coarse = outs[outs.size() - 2].features[0]->value;
  CHECK(fine.dim(2) == 2 * coarse.dim(2));
  CHECK(fine.dim(3) == 2 * coarse.dim(3));
}

TEST_CASE("discriminator learns to separate real from fake in a few steps") {
  const ArchConfig arch = ArchConfig::toy_preset();
  auto bundle = ModelBundle::create(arch, Mode::fbf_ts_fg, 11);
  nn::Adam<float> adam(bundle->d_store, 2e-4, 0.5, 0.999);
  std::mt19937_64 rng(5);

  // Toy "real" pairs are smooth dark images, "fake" pairs are noise.
  auto make_input = [&](bool real) {
    Image a(128, 64, 3, real ? -0.5f : 0.0f);
    Image b = a;
    if (!real) {
      std::uniform_real_distribution<float> u(-1.0f, 1.0f);
      for (auto& v : a.data) v = u(rng);
      for (auto& v : b.data) v = u(rng);
    }
    const Image cond = random_image(128, 64, 99);  // shared conditioning
    auto nc = nn::make_leaf(image_to_tensor(cond));
    auto na = nn::make_leaf(image_to_tensor(a));
    auto nb = nn::make_leaf(image_to_tensor(b));
    return nn::concat_channels<float>({nc, nc, na, nb});
  };

  for (int step = 0; step < 10; ++step) {
    auto real_outs = bundle->D->forward(make_input(true));
    auto fake_outs = bundle->D->forward(make_input(false));
    auto loss = gan_loss_multiscale(real_outs, fake_outs, GanSide::discriminator,
                                    GanMode::log_loss);
    bundle->d_store.zero_grads();
    nn::backward(loss);
    adam.step();
  }

  auto mean_logit = [&](bool real) {
    const auto outs = bundle->D->forward(make_input(real));
    double sum = 0;
    int64_t n = 0;
    for (const auto& o : outs) {
      for (int64_t i = 0; i < o.logits->value.numel(); ++i) sum += o.logits->value[i];
      n += o.logits->value.numel();
    }
    return sum / static_cast<double>(n);
  };
  CHECK(mean_logit(true) - mean_logit(false) > 0.0);
}

TEST_CASE("face generator: shape, bounded residual, determinism at toy scale") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 7);
  const Image pose_patch = random_image(32, 32, 5);
  const Image face_patch = random_image(32, 32, 6);
  const Image r = bundle->face_generator_forward(pose_patch, face_patch);
  CHECK(r.width == 32);
  CHECK(r.height == 32);
  for (float v : r.data) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  const Image r2 = bundle->face_generator_forward(pose_patch, face_patch);
  CHECK(r.data == r2.data);
  CHECK_THROWS_AS(bundle->face_generator_forward(random_image(16, 16, 7), face_patch), Error);
}

TEST_CASE("fake detector: output in (0,1), deterministic") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 7);
  for (uint64_t s = 0; s < 5; ++s) {
    const double p =
        bundle->fake_detector_forward(random_image(128, 64, 100 + s), random_image(128, 64, 200 + s));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  const Image a = random_image(128, 64, 300), b = random_image(128, 64, 301);
  CHECK(bundle->fake_detector_forward(a, b) == bundle->fake_detector_forward(a, b));
}

TEST_CASE("parameter counts are a pure function of the toy config") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 7);
  // Golden numbers, derived by summing conv shapes by hand:
  //   generator: stem 7x7 6->16 (4720) + downs 16->32 (4640), 32->64 (18496)
  //   + 2 res blocks at 64 (2*73856) + ups (18464, 4624) + head (2355).
  CHECK(bundle->g_store.parameter_count() == 201011);
  //   per discriminator scale (12ch input, 16 base, 3 layers):
  //   3088 + 8224 + 32832 + 131200 + 2049 = 177393; two scales.
  CHECK(bundle->d_store.parameter_count() == 2 * 177393);
  //   face generator: one res block instead of two.
  CHECK(bundle->fg_store.parameter_count() == 127155);
  //   face discriminator: 6ch input -> 1552 first layer.
  CHECK(bundle->fd_store.parameter_count() == 175857);
  //   detector: conv stack (no 1ch head) + 128->1 fully connected.
  CHECK(bundle->det_store.parameter_count() == 173937);

  // Counts depend only on the config, not the seed.
  auto other = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 12345);
  CHECK(other->g_store.parameter_count() == bundle->g_store.parameter_count());

  // Frame-by-frame bundles condition the discriminator on single images.
  auto fbf = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf, 7);
  CHECK(fbf->discriminator_in_channels() == 6);
  CHECK(fbf->d_store.parameter_count() < bundle->d_store.parameter_count());
}

TEST_CASE("generator gradients match finite differences (float, smooth point)") {
  // Small-but-real config keeps the finite-difference sweep fast.
  ArchConfig arch = ArchConfig::toy_preset();
  arch.image_width = 32;
  arch.image_height = 16;
  arch.face_size = 8;
  arch.face_downsamples = 2;
  auto bundle = ModelBundle::create(arch, Mode::fbf_ts_fg, 3);

  auto pose = nn::make_leaf(image_to_tensor(random_image(32, 16, 8)));
  auto prev = nn::make_leaf(image_to_tensor(random_image(32, 16, 9)), true);

  // Random scalar projection of the output, accumulated in double so the
  // finite differences are not drowned by float32 rounding of the loss.
  std::mt19937_64 proj_rng(55);
  std::vector<double> proj(static_cast<size_t>(3 * 16 * 32));
  for (auto& v : proj) v = (proj_rng() & 1) ? 1.0 : -1.0;
  auto project = [&](const FTensor& out) {
    double acc = 0;
    for (int64_t i = 0; i < out.numel(); ++i) acc += proj[static_cast<size_t>(i)] * out[i];
    return acc / static_cast<double>(out.numel());
  };
  auto forward_value = [&] { return project(bundle->G->forward(pose, prev)->value); };

  // Analytic gradient of the same projection via a backward seed.
  auto out_node = bundle->G->forward(pose, prev);
  FTensor seed(out_node->value.shape());
  for (int64_t i = 0; i < seed.numel(); ++i)
    seed[i] = static_cast<float>(proj[static_cast<size_t>(i)] / seed.numel());
  bundle->g_store.zero_grads();
  prev->zero_grad();
  nn::backward(out_node, &seed);

  // 32-bit finite differences are only meaningful away from ReLU kinks and
  // above the quantization floor: a point counts as smooth when two step
  // sizes agree with each other.
  auto fd_at = [&](const nn::NodePtr<float>& p, int64_t i, float eps) {
    const float orig = p->value[i];
    p->value[i] = orig + eps;
    const double up = forward_value();
    p->value[i] = orig - eps;
    const double down = forward_value();
    p->value[i] = orig;
    return (up - down) / (2.0 * static_cast<double>(eps));
  };

  std::mt19937_64 rng(17);
  const auto& params = bundle->g_store.entries();
  int checked = 0;
  int attempts = 0;
  while (checked < 10 && attempts < 500) {
    ++attempts;
    const auto& [name, p] = params[rng() % params.size()];
    const int64_t i = static_cast<int64_t>(rng() % p->value.numel());
    const double an = p->grad.defined() ? p->grad[i] : 0.0;
    if (std::abs(an) < 1e-4) continue;  // below the float noise floor
    const double fd1 = fd_at(p, i, 2e-3f);
    const double fd2 = fd_at(p, i, 1e-3f);
    if (std::abs(fd1 - fd2) > 0.002 * std::max(std::abs(fd1), std::abs(fd2))) continue;
    const double rel = std::abs(fd1 - an) / std::max({std::abs(fd1), std::abs(an), 1e-8});
    CHECK(rel < 1e-2);
    ++checked;
  }
  CHECK(checked == 10);

  // Differentiable w.r.t. the previous frame as well (the temporal chain).
  double prev_grad_norm = 0;
  for (int64_t i = 0; i < prev->grad.numel(); ++i)
    prev_grad_norm += std::abs(prev->grad[i]);
  CHECK(prev_grad_norm > 0.0);
}

TEST_CASE("local stage consumes and upsamples the global stage") {
  ArchConfig arch = ArchConfig::toy_preset();
  auto bundle = ModelBundle::create(arch, Mode::fbf_ts_fg, 21);
  const int64_t global_params = bundle->g_store.parameter_count();
  const int global_scales = bundle->D->n_scales();

  bundle->promote_to_local();
  CHECK(bundle->arch.image_width == 256);
  CHECK(bundle->arch.image_height == 128);
  CHECK(bundle->g_store.parameter_count() > global_params);  // weights kept, branch added
  CHECK(bundle->D->n_scales() == global_scales + 1);

  const Image pose = random_image(256, 128, 31);
  const Image prev = random_image(256, 128, 32);
  const Image out = bundle->generator_forward(pose, prev);
  CHECK(out.width == 256);
  CHECK(out.height == 128);

  // The fine output depends on the nested global network's weights.
  auto global_weight = bundle->g_store.find("g.res0.c0.w");
  REQUIRE(global_weight != nullptr);
  global_weight->value[0] += 0.5f;
  const Image perturbed = bundle->generator_forward(pose, prev);
  CHECK(out.data != perturbed.data);
}

TEST_CASE("generate_sequence: zero image at t=0, chaining in temporal mode") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 7);
  std::vector<Image> poses;
  for (int i = 0; i < 3; ++i) poses.push_back(random_image(128, 64, 400 + i));

  std::vector<Image> seen_prev;
  auto hook = [&](size_t, const Image& prev) { seen_prev.push_back(prev); };
  const auto frames = bundle->generate_sequence(poses, Mode::fbf_ts, hook);
  REQUIRE(frames.size() == 3);
  REQUIRE(seen_prev.size() == 3);
  for (float v : seen_prev[0].data) CHECK(v == 0.0f);
  CHECK(seen_prev[1].data == frames[0].data);
  CHECK(seen_prev[2].data == frames[1].data);

  // Frame-by-frame: every call gets the zero image.
  seen_prev.clear();
  bundle->generate_sequence(poses, Mode::fbf, hook);
  for (const auto& prev : seen_prev)
    for (float v : prev.data) CHECK(v == 0.0f);
}
