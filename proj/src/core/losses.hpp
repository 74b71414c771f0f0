// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/features.hpp"
#include "core/nets.hpp"

namespace retarget {

enum class GanSide { generator, discriminator };

// Adversarial loss for one discriminator scale, from raw logit maps.
// log mode:      D side: -E[log s(real)] - E[log(1 - s(fake))]
//                G side: -E[log s(fake)]
// least squares: D side: E[(real-1)^2] + E[fake^2], G side: E[(fake-1)^2]
// The generator side ignores real_logits (it may be a null node).
template <typename T>
nn::NodePtr<T> gan_loss_single(const nn::NodePtr<T>& real_logits,
                               const nn::NodePtr<T>& fake_logits, GanSide side, GanMode mode) {
  auto squared_error_to = [](const nn::NodePtr<T>& logits, T target) {
    auto d = nn::add_scalar(logits, -target);
    return nn::mean_all(nn::mul(d, d));
  };
  if (side == GanSide::generator) {
    if (mode == GanMode::log_loss)
      return nn::mean_all(nn::softplus(nn::scale(fake_logits, T(-1))));
    return squared_error_to(fake_logits, T(1));
  }
  if (!real_logits) fail(ErrorCode::shape_mismatch, "discriminator loss needs real logits");
  if (mode == GanMode::log_loss)
    return nn::add(nn::mean_all(nn::softplus(nn::scale(real_logits, T(-1)))),
                   nn::mean_all(nn::softplus(fake_logits)));
  return nn::add(squared_error_to(real_logits, T(1)), squared_error_to(fake_logits, T(0)));
}

// Sum of gan_loss_single over discriminator scales.
FNode gan_loss_multiscale(const std::vector<nets::DiscriminatorOutput>& real,
                          const std::vector<nets::DiscriminatorOutput>& fake, GanSide side,
                          GanMode mode);

// Temporally smoothed GAN loss: the discriminator judges the channel-wise
// concatenation (x_t, x_t+1, img_t, img_t+1).
FNode gan_loss_temporal(const nets::MultiScaleDiscriminator& D, const FNode& pose_t,
                        const FNode& pose_t1, const FNode& real_t, const FNode& real_t1,
                        const FNode& fake_t, const FNode& fake_t1, GanSide side, GanMode mode);

// Mean absolute difference between corresponding feature maps, averaged per
// layer within a scale and summed over scales.
FNode feature_matching_loss(const std::vector<nets::DiscriminatorOutput>& real,
                            const std::vector<nets::DiscriminatorOutput>& fake);

// Sum over the extractor's five taps of mean absolute feature differences.
template <typename T>
nn::NodePtr<T> perceptual_loss(const nn::NodePtr<T>& pred, const nn::NodePtr<T>& gt,
                               const FeatureExtractor<T>& extractor) {
  if (!pred->value.same_shape(gt->value))
    fail(ErrorCode::shape_mismatch, "perceptual_loss: image shapes differ");
  const auto tap_pred = extractor.taps(pred);
  const auto tap_gt = extractor.taps(gt);
  nn::NodePtr<T> total;
  for (size_t i = 0; i < tap_pred.size(); ++i) {
    auto term = nn::l1_mean(tap_pred[i], tap_gt[i]);
    total = total ? nn::add(total, term) : term;
  }
  return total;
}

// Raw (unweighted) term values for logging and tests.
struct ObjectiveBreakdown {
  double gan = 0.0;
  double feature_matching = 0.0;
  double perceptual = 0.0;
  double total = 0.0;
};

struct TemporalBatchNodes {
  FNode pose_t, pose_t1;  // stick figures x_t, x_t+1
  FNode real_t, real_t1;  // ground truth y_t, y_t+1
  FNode fake_t, fake_t1;  // generated G(x_t), G(x_t+1)
};

// Full staged objective for the main generator: temporal GAN term
// + lambda_FM * sum_scales L_FM + lambda_P * (L_P(t) + L_P(t+1)).
// Zero weights drop their term from the graph entirely.
FNode generator_objective_full(const nets::MultiScaleDiscriminator& D,
                               const FeatureExtractor<float>& extractor,
                               const TemporalBatchNodes& batch, const LossWeights& weights,
                               Stage stage, ObjectiveBreakdown* breakdown);

// Frame-by-frame variant (single-image GAN loss, one perceptual term).
FNode generator_objective_single(const nets::MultiScaleDiscriminator& D,
                                 const FeatureExtractor<float>& extractor, const FNode& pose,
                                 const FNode& real, const FNode& fake, const LossWeights& weights,
                                 Stage stage, ObjectiveBreakdown* breakdown);

struct FaceBatchNodes {
  FNode pose_patch;  // x_F
  FNode gen_patch;   // G(x)_F
  FNode residual;    // r = G_f(x_F, G(x)_F)
  FNode real_patch;  // y_F
};

// Face objective: GAN term on (x_F, r + G(x)_F) vs (x_F, y_F) plus
// lambda_p * L_P(r + G(x)_F, y_F).
FNode face_objective(const nets::PatchDiscriminator& D_f,
                     const FeatureExtractor<float>& extractor, const FaceBatchNodes& batch,
                     const LossWeights& weights, double lambda_p, ObjectiveBreakdown* breakdown);

// Discriminator-side loss for the face GAN.
FNode face_discriminator_loss(const nets::PatchDiscriminator& D_f, const FaceBatchNodes& batch,
                              GanMode mode);

}  // namespace retarget
