// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/losses.hpp"

namespace retarget {

namespace {

std::vector<nets::DiscriminatorOutput> detach_features(
    const std::vector<nets::DiscriminatorOutput>& outs) {
  std::vector<nets::DiscriminatorOutput> detached;
  detached.reserve(outs.size());
  for (const auto& o : outs) {
    nets::DiscriminatorOutput d;
    d.logits = nn::detach(o.logits);
    for (const auto& f : o.features) d.features.push_back(nn::detach(f));
    detached.push_back(std::move(d));
  }
  return detached;
}

}  // namespace

FNode gan_loss_multiscale(const std::vector<nets::DiscriminatorOutput>& real,
                          const std::vector<nets::DiscriminatorOutput>& fake, GanSide side,
                          GanMode mode) {
  if (side == GanSide::discriminator && real.size() != fake.size())
    fail(ErrorCode::shape_mismatch, "gan_loss_multiscale: scale count mismatch");
  FNode total;
  for (size_t k = 0; k < fake.size(); ++k) {
    auto term = gan_loss_single(real.empty() ? FNode{} : real[k].logits, fake[k].logits, side,
                                mode);
    total = total ? nn::add(total, term) : term;
  }
  return total;
}

FNode gan_loss_temporal(const nets::MultiScaleDiscriminator& D, const FNode& pose_t,
                        const FNode& pose_t1, const FNode& real_t, const FNode& real_t1,
                        const FNode& fake_t, const FNode& fake_t1, GanSide side, GanMode mode) {
  auto real_outs = D.forward(nn::concat_channels<float>({pose_t, pose_t1, real_t, real_t1}));
  auto fake_outs = D.forward(nn::concat_channels<float>({pose_t, pose_t1, fake_t, fake_t1}));
  return gan_loss_multiscale(real_outs, fake_outs, side, mode);
}

FNode feature_matching_loss(const std::vector<nets::DiscriminatorOutput>& real,
                            const std::vector<nets::DiscriminatorOutput>& fake) {
  if (real.size() != fake.size())
    fail(ErrorCode::shape_mismatch, "feature_matching_loss: scale count mismatch");
  FNode total;
  for (size_t k = 0; k < real.size(); ++k) {
    if (real[k].features.size() != fake[k].features.size())
      fail(ErrorCode::shape_mismatch, "feature_matching_loss: layer count mismatch");
    const float layer_weight = 1.0f / static_cast<float>(real[k].features.size());
    FNode scale_term;
    for (size_t l = 0; l < real[k].features.size(); ++l) {
      auto term = nn::l1_mean(real[k].features[l], fake[k].features[l]);
      scale_term = scale_term ? nn::add(scale_term, term) : term;
    }
    scale_term = nn::scale(scale_term, layer_weight);
    total = total ? nn::add(total, scale_term) : scale_term;
  }
  return total;
}

namespace {

// Shared assembly of GAN + weighted FM + weighted perceptual. Zero weights
// are skipped so the total reduces exactly to the remaining terms.
FNode assemble_objective(FNode gan, FNode fm, FNode perceptual, const LossWeights& weights,
                         double lambda_p, ObjectiveBreakdown* breakdown) {
  FNode total = gan;
  if (fm && weights.lambda_fm > 0.0)
    total = nn::add(total, nn::scale(fm, static_cast<float>(weights.lambda_fm)));
  if (perceptual && lambda_p > 0.0)
    total = nn::add(total, nn::scale(perceptual, static_cast<float>(lambda_p)));
  if (breakdown) {
    breakdown->gan = nn::scalar_value(gan);
    breakdown->feature_matching = fm ? nn::scalar_value(fm) : 0.0;
    breakdown->perceptual = perceptual ? nn::scalar_value(perceptual) : 0.0;
    breakdown->total = nn::scalar_value(total);
  }
  return total;
}

}  // namespace

FNode generator_objective_full(const nets::MultiScaleDiscriminator& D,
                               const FeatureExtractor<float>& extractor,
                               const TemporalBatchNodes& batch, const LossWeights& weights,
                               Stage stage, ObjectiveBreakdown* breakdown) {
  auto fake_outs = D.forward(
      nn::concat_channels<float>({batch.pose_t, batch.pose_t1, batch.fake_t, batch.fake_t1}));
  auto gan = gan_loss_multiscale({}, fake_outs, GanSide::generator, weights.gan_mode);

  FNode fm;
  if (weights.lambda_fm > 0.0) {
    auto real_outs = detach_features(D.forward(
        nn::concat_channels<float>({batch.pose_t, batch.pose_t1, batch.real_t, batch.real_t1})));
    fm = feature_matching_loss(real_outs, fake_outs);
  }

  FNode perceptual;
  const double lambda_p = weights.lambda_p(stage);
  if (lambda_p > 0.0)
    perceptual = nn::add(perceptual_loss(batch.fake_t, batch.real_t, extractor),
                         perceptual_loss(batch.fake_t1, batch.real_t1, extractor));

  return assemble_objective(gan, fm, perceptual, weights, lambda_p, breakdown);
}

FNode generator_objective_single(const nets::MultiScaleDiscriminator& D,
                                 const FeatureExtractor<float>& extractor, const FNode& pose,
                                 const FNode& real, const FNode& fake, const LossWeights& weights,
                                 Stage stage, ObjectiveBreakdown* breakdown) {
  auto fake_outs = D.forward(nn::concat_channels<float>({pose, fake}));
  auto gan = gan_loss_multiscale({}, fake_outs, GanSide::generator, weights.gan_mode);

  FNode fm;
  if (weights.lambda_fm > 0.0) {
    auto real_outs = detach_features(D.forward(nn::concat_channels<float>({pose, real})));
    fm = feature_matching_loss(real_outs, fake_outs);
  }

  FNode perceptual;
  const double lambda_p = weights.lambda_p(stage);
  if (lambda_p > 0.0) perceptual = perceptual_loss(fake, real, extractor);

  return assemble_objective(gan, fm, perceptual, weights, lambda_p, breakdown);
}

FNode face_objective(const nets::PatchDiscriminator& D_f,
                     const FeatureExtractor<float>& extractor, const FaceBatchNodes& batch,
                     const LossWeights& weights, double lambda_p, ObjectiveBreakdown* breakdown) {
  auto final_face = nn::add(batch.residual, batch.gen_patch);  // r + G(x)_F
  auto fake_out = D_f.forward(nn::concat_channels<float>({batch.pose_patch, final_face}));
  auto gan = gan_loss_single(FNode{}, fake_out.logits, GanSide::generator, weights.gan_mode);

  FNode perceptual;
  if (lambda_p > 0.0) perceptual = perceptual_loss(final_face, batch.real_patch, extractor);

  return assemble_objective(gan, nullptr, perceptual, weights, lambda_p, breakdown);
}

FNode face_discriminator_loss(const nets::PatchDiscriminator& D_f, const FaceBatchNodes& batch,
                              GanMode mode) {
  auto final_face = nn::add(batch.residual, batch.gen_patch);
  auto real_out = D_f.forward(nn::concat_channels<float>({batch.pose_patch, batch.real_patch}));
  auto fake_out = D_f.forward(
      nn::concat_channels<float>({batch.pose_patch, nn::detach(final_face)}));
  return gan_loss_single(real_out.logits, fake_out.logits, GanSide::discriminator, mode);
}

}  // namespace retarget
