// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/losses.hpp"
#include "core/render.hpp"

namespace retarget {

namespace {

// Deterministic Fisher-Yates (std::shuffle is implementation-defined).
template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::mt19937_64 epoch_rng(uint64_t seed, int epoch) {
  return std::mt19937_64(seed * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(epoch));
}

void check_finite(double d_loss, double g_total, const std::string& stage, int epoch, int step,
                  const ObjectiveBreakdown& bd) {
  if (std::isfinite(d_loss) && std::isfinite(g_total)) return;
  std::ostringstream dump;
  dump << "non-finite loss at stage " << stage << " epoch " << epoch << " step " << step
       << ": d=" << d_loss << " g_total=" << g_total << " gan=" << bd.gan
       << " fm=" << bd.feature_matching << " perceptual=" << bd.perceptual;
  fail(ErrorCode::non_finite_loss, dump.str());
}

void save_epoch_checkpoint(const ModelBundle& bundle, const std::string& dir, Stage stage,
                           int epoch) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  char name[64];
  std::snprintf(name, sizeof(name), "checkpoint_%s_epoch%03d.rtc", stage_name(stage), epoch);
  save_model_bundle(bundle, dir + "/" + name);
  save_model_bundle(bundle, dir + "/latest.rtc");
}

FTensor batch_of(const TrainDataset& data, const std::vector<size_t>& positions,
                 bool pose_images) {
  std::vector<const Image*> ptrs;
  ptrs.reserve(positions.size());
  for (size_t p : positions)
    ptrs.push_back(pose_images ? &data.pose_images[p] : &data.frames[p]);
  return images_to_batch(ptrs);
}

}  // namespace

std::vector<TemporalPair> make_temporalpairs_impl(const DatasetManifest& manifest, int stride,
                                                  Split split) {
  if (stride < 1) fail(ErrorCode::invalid_config, "stride must be >= 1");
  std::map<int64_t, size_t> position;
  std::vector<int64_t> indices;
  {
    size_t pos = 0;
    for (const auto& e : manifest.entries) {
      const bool wanted = e.usable && (split == Split::unassigned || e.split == split);
      if (wanted) {
        position[e.frame_index] = pos;
        indices.push_back(e.frame_index);
      }
      ++pos;
    }
  }
  if (indices.empty()) fail(ErrorCode::empty_dataset, "no usable frames for pairing");
  std::vector<TemporalPair> pairs;
  for (int64_t idx : indices) {
    auto it = position.find(idx + stride);
    if (it == position.end()) continue;
    TemporalPair p;
    p.frame_a = idx;
    p.frame_b = idx + stride;
    p.a = position[idx];
    p.b = it->second;
    pairs.push_back(p);
  }
  if (pairs.empty())
    fail(ErrorCode::empty_dataset, "dataset yields no temporal pairs at stride " +
                                       std::to_string(stride));
  return pairs;
}

std::vector<TemporalPair> make_temporal_pairs(const DatasetManifest& manifest, int stride,
                                              Split split) {
  return make_temporalpairs_impl(manifest, stride, split);
}

TrainDataset TrainDataset::load(const DatasetManifest& manifest, Split split, int width,
                                int height) {
  auto entries = manifest.usable_entries(split);
  if (entries.empty() && split != Split::unassigned)
    entries = manifest.usable_entries(Split::unassigned);  // unsplit dataset: take everything
  if (entries.empty()) fail(ErrorCode::empty_dataset, "no usable entries in manifest");

  TrainDataset data;
  data.width = width;
  data.height = height;
  const double sx = manifest.width > 0 ? static_cast<double>(width) / manifest.width : 1.0;
  const double sy = manifest.height > 0 ? static_cast<double>(height) / manifest.height : 1.0;

  for (const ManifestEntry* e : entries) {
    Image frame = load_image(e->frame_path);
    while (frame.width > width && frame.height > height && frame.width % 2 == 0 &&
           frame.height % 2 == 0)
      frame = downsample_half(frame);
    if (frame.width != width || frame.height != height)
      fail(ErrorCode::size_mismatch,
           "frame " + e->frame_path + " cannot be brought to " + std::to_string(width) + "x" +
               std::to_string(height));

    std::ifstream in(e->pose_path);
    if (!in) fail(ErrorCode::io_error, "cannot open " + e->pose_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Pose pose = parse_detector_frame(buf.str(), SkeletonTopology::body25());
    for (auto& kp : pose.keypoints) {
      kp.x *= sx;
      kp.y *= sy;
    }

    data.position_of[e->frame_index] = data.frames.size();
    data.frame_indices.push_back(e->frame_index);
    data.frames.push_back(std::move(frame));
    data.pose_images.push_back(render_stick_figure(pose, width, height));
    data.poses.push_back(std::move(pose));
  }
  return data;
}

void MetricsLog::add(const MetricsRow& row) {
  rows_.push_back(row);
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) fail(ErrorCode::io_error, "cannot append to metrics log " + path_);
  if (!wrote_header_ && out.tellp() == 0)
    out << "stage\tepoch\tstep\td_loss\tg_gan\tg_fm\tg_perceptual\tg_total\n";
  wrote_header_ = true;
  out << row.stage << "\t" << row.epoch << "\t" << row.step << "\t" << row.d_loss << "\t"
      << row.g_gan << "\t" << row.g_fm << "\t" << row.g_perceptual << "\t" << row.g_total << "\n";
}

double MetricsLog::epoch_mean_total(const std::string& stage, int epoch) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows_)
    if (r.stage == stage && r.epoch == epoch) {
      sum += r.g_total;
      ++n;
    }
  if (n == 0) fail(ErrorCode::empty_dataset, "no metrics rows for epoch");
  return sum / n;
}

namespace {

// The trainer works on the training split; a manifest that was never split
// contributes all of its usable entries.
Split effective_train_split(const DatasetManifest& manifest) {
  return manifest.usable_entries(Split::train).empty() ? Split::unassigned : Split::train;
}

void train_gan_stage(ModelBundle& bundle, const DatasetManifest& manifest,
                     const TrainConfig& cfg, MetricsLog* log, const std::string& ckpt_dir,
                     const TrainHooks* hooks) {
  const Split split = effective_train_split(manifest);
  TrainDataset data = TrainDataset::load(manifest, split, cfg.width, cfg.height);
  const bool temporal = mode_is_temporal(cfg.mode);

  std::vector<TemporalPair> pairs;
  std::vector<size_t> singles;
  if (temporal) {
    pairs = make_temporal_pairs(manifest, cfg.stride, split);
    // Manifest positions differ from dataset positions; remap.
    for (auto& p : pairs) {
      p.a = data.position_of.at(p.frame_a);
      p.b = data.position_of.at(p.frame_b);
    }
  } else {
    for (size_t i = 0; i < data.size(); ++i) singles.push_back(i);
  }

  FeatureExtractor<float> extractor = FeatureExtractor<float>::for_arch(bundle.arch);
  nn::Adam<float> adam_g(bundle.g_store, cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2,
                         cfg.optim.eps);
  nn::Adam<float> adam_d(bundle.d_store, cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2,
                         cfg.optim.eps);

  const Stage stage = cfg.stage;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto rng = epoch_rng(cfg.seed, epoch);
    int step = 0;
    if (temporal) {
      shuffle_deterministic(pairs, rng);
      for (size_t start = 0; start < pairs.size(); start += static_cast<size_t>(cfg.batch_size)) {
        const size_t end = std::min(pairs.size(), start + static_cast<size_t>(cfg.batch_size));
        std::vector<size_t> at, bt;
        for (size_t i = start; i < end; ++i) {
          at.push_back(pairs[i].a);
          bt.push_back(pairs[i].b);
        }
        auto pose_t = nn::make_leaf(batch_of(data, at, true));
        auto pose_t1 = nn::make_leaf(batch_of(data, bt, true));
        auto real_t = nn::make_leaf(batch_of(data, at, false));
        auto real_t1 = nn::make_leaf(batch_of(data, bt, false));

        // Two-frame prediction: the first frame is conditioned on the zero
        // image, the second on the first output.
        auto zero_prev = nn::make_leaf(
            zero_image_tensor(static_cast<int>(at.size()), 3, cfg.height, cfg.width));
        if (hooks && hooks->on_generator_input) hooks->on_generator_input(zero_prev->value, true);
        auto fake_t = bundle.G->forward(pose_t, zero_prev);
        if (hooks && hooks->on_generator_input) hooks->on_generator_input(fake_t->value, false);
        auto fake_t1 = bundle.G->forward(pose_t1, fake_t);

        auto d_loss = gan_loss_temporal(*bundle.D, pose_t, pose_t1, real_t, real_t1,
                                        nn::detach(fake_t), nn::detach(fake_t1),
                                        GanSide::discriminator, cfg.weights.gan_mode);
        bundle.d_store.zero_grads();
        nn::backward(d_loss);
        adam_d.step();

        bundle.d_store.set_requires_grad(false);
        ObjectiveBreakdown bd;
        TemporalBatchNodes batch{pose_t, pose_t1, real_t, real_t1, fake_t, fake_t1};
        auto g_loss =
            generator_objective_full(*bundle.D, extractor, batch, cfg.weights, stage, &bd);
        bundle.g_store.zero_grads();
        nn::backward(g_loss);
        adam_g.step();
        bundle.d_store.set_requires_grad(true);

        const double d_value = nn::scalar_value(d_loss);
        check_finite(d_value, bd.total, stage_name(stage), epoch, step, bd);
        if (log)
          log->add({stage_name(stage), epoch, step, d_value, bd.gan, bd.feature_matching,
                    bd.perceptual, bd.total});
        ++step;
      }
    } else {
      shuffle_deterministic(singles, rng);
      for (size_t start = 0; start < singles.size();
           start += static_cast<size_t>(cfg.batch_size)) {
        const size_t end = std::min(singles.size(), start + static_cast<size_t>(cfg.batch_size));
        std::vector<size_t> at(singles.begin() + static_cast<std::ptrdiff_t>(start),
                               singles.begin() + static_cast<std::ptrdiff_t>(end));
        auto pose = nn::make_leaf(batch_of(data, at, true));
        auto real = nn::make_leaf(batch_of(data, at, false));
        auto zero_prev = nn::make_leaf(
            zero_image_tensor(static_cast<int>(at.size()), 3, cfg.height, cfg.width));
        if (hooks && hooks->on_generator_input) hooks->on_generator_input(zero_prev->value, true);
        auto fake = bundle.G->forward(pose, zero_prev);

        auto real_out = bundle.D->forward(nn::concat_channels<float>({pose, real}));
        auto fake_out = bundle.D->forward(
            nn::concat_channels<float>({pose, nn::detach(fake)}));
        auto d_loss =
            gan_loss_multiscale(real_out, fake_out, GanSide::discriminator, cfg.weights.gan_mode);
        bundle.d_store.zero_grads();
        nn::backward(d_loss);
        adam_d.step();

        bundle.d_store.set_requires_grad(false);
        ObjectiveBreakdown bd;
        auto g_loss = generator_objective_single(*bundle.D, extractor, pose, real, fake,
                                                 cfg.weights, stage, &bd);
        bundle.g_store.zero_grads();
        nn::backward(g_loss);
        adam_g.step();
        bundle.d_store.set_requires_grad(true);

        const double d_value = nn::scalar_value(d_loss);
        check_finite(d_value, bd.total, stage_name(stage), epoch, step, bd);
        if (log)
          log->add({stage_name(stage), epoch, step, d_value, bd.gan, bd.feature_matching,
                    bd.perceptual, bd.total});
        ++step;
      }
    }
    bundle.epoch = epoch;
    save_epoch_checkpoint(bundle, ckpt_dir, stage, epoch);
  }
}

void train_face_stage(ModelBundle& bundle, const DatasetManifest& manifest,
                      const TrainConfig& cfg, MetricsLog* log, const std::string& ckpt_dir,
                      const TrainHooks* hooks) {
  TrainDataset data =
      TrainDataset::load(manifest, effective_train_split(manifest), cfg.width, cfg.height);

  // G and D are frozen for the whole stage, so the full-image outputs can be
  // generated once and cached.
  std::function<void(size_t, const Image&)> on_input;
  if (hooks && hooks->on_generator_input)
    on_input = [&](size_t frame, const Image& prev) {
      hooks->on_generator_input(image_to_tensor(prev), frame == 0);
    };
  const std::vector<Image> fakes = bundle.generate_sequence(data.pose_images, bundle.mode,
                                                            on_input);

  struct FaceSample {
    Image pose_patch, gen_patch, real_patch;
  };
  std::vector<FaceSample> samples;
  const int face = bundle.arch.face_size;
  for (size_t i = 0; i < data.size(); ++i) {
    const Pose& pose = data.poses[i];
    if (!pose.present(pose.topology->nose)) continue;
    const FaceBox box = face_box(pose, face, cfg.width, cfg.height);
    samples.push_back({crop_region(data.pose_images[i], box), crop_region(fakes[i], box),
                       crop_region(data.frames[i], box)});
  }
  if (samples.empty()) fail(ErrorCode::empty_dataset, "no frames with a visible nose");

  FeatureExtractor<float> extractor = FeatureExtractor<float>::for_arch(bundle.arch);
  nn::Adam<float> adam_fg(bundle.fg_store, cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2,
                          cfg.optim.eps);
  nn::Adam<float> adam_fd(bundle.fd_store, cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2,
                          cfg.optim.eps);
  // The face perceptual weight follows the deepest completed full-image stage.
  const double lambda_p =
      cfg.weights.lambda_p(bundle.local_done ? Stage::local_stage : Stage::global_stage);

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto rng = epoch_rng(cfg.seed ^ 0xfaceULL, epoch);
    shuffle_deterministic(order, rng);
    int step = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      std::vector<const Image*> pose_ptrs, gen_ptrs, real_ptrs;
      for (size_t i = start; i < end; ++i) {
        pose_ptrs.push_back(&samples[order[i]].pose_patch);
        gen_ptrs.push_back(&samples[order[i]].gen_patch);
        real_ptrs.push_back(&samples[order[i]].real_patch);
      }
      FaceBatchNodes batch;
      batch.pose_patch = nn::make_leaf(images_to_batch(pose_ptrs));
      batch.gen_patch = nn::make_leaf(images_to_batch(gen_ptrs));
      batch.real_patch = nn::make_leaf(images_to_batch(real_ptrs));
      batch.residual = bundle.G_f->forward(
          nn::concat_channels<float>({batch.pose_patch, batch.gen_patch}));

      auto d_loss = face_discriminator_loss(*bundle.D_f, batch, cfg.weights.gan_mode);
      bundle.fd_store.zero_grads();
      nn::backward(d_loss);
      adam_fd.step();

      bundle.fd_store.set_requires_grad(false);
      ObjectiveBreakdown bd;
      auto g_loss = face_objective(*bundle.D_f, extractor, batch, cfg.weights, lambda_p, &bd);
      bundle.fg_store.zero_grads();
      nn::backward(g_loss);
      adam_fg.step();
      bundle.fd_store.set_requires_grad(true);

      const double d_value = nn::scalar_value(d_loss);
      check_finite(d_value, bd.total, "face", epoch, step, bd);
      if (log)
        log->add({"face", epoch, step, d_value, bd.gan, 0.0, bd.perceptual, bd.total});
      ++step;
    }
    bundle.epoch = epoch;
    save_epoch_checkpoint(bundle, ckpt_dir, Stage::face_stage, epoch);
  }
}

}  // namespace

void train(ModelBundle& bundle, const DatasetManifest& manifest, const TrainConfig& config,
           MetricsLog* log, const std::string& checkpoint_dir, const TrainHooks* hooks) {
  config.validate();

  switch (config.stage) {
    case Stage::global_stage:
      if (bundle.arch.stage == Stage::local_stage)
        fail(ErrorCode::stage_order_violation,
             "global stage cannot run after the bundle was promoted to local");
      break;
    case Stage::local_stage:
      if (!bundle.global_done)
        fail(ErrorCode::stage_order_violation, "local stage requires a completed global stage");
      bundle.promote_to_local();
      break;
    case Stage::face_stage:
      if (!bundle.global_done)
        fail(ErrorCode::stage_order_violation, "face stage requires a completed global stage");
      if (bundle.arch.stage == Stage::local_stage && !bundle.local_done)
        fail(ErrorCode::stage_order_violation,
             "face stage requires a completed local stage on a local-tier bundle");
      break;
  }

  if (config.stage != Stage::face_stage &&
      mode_is_temporal(config.mode) != mode_is_temporal(bundle.mode))
    fail(ErrorCode::invalid_config,
         std::string("config mode ") + mode_name(config.mode) +
             " is incompatible with bundle mode " + mode_name(bundle.mode));
  if (config.width != bundle.arch.image_width || config.height != bundle.arch.image_height)
    fail(ErrorCode::invalid_config,
         "config resolution " + std::to_string(config.width) + "x" +
             std::to_string(config.height) + " does not match bundle resolution " +
             std::to_string(bundle.arch.image_width) + "x" +
             std::to_string(bundle.arch.image_height));

  if (config.stage == Stage::face_stage) {
    train_face_stage(bundle, manifest, config, log, checkpoint_dir, hooks);
    bundle.face_done = true;
  } else {
    train_gan_stage(bundle, manifest, config, log, checkpoint_dir, hooks);
    if (config.stage == Stage::global_stage)
      bundle.global_done = true;
    else
      bundle.local_done = true;
  }
}

std::vector<TrainConfig> paper_schedule(ScheduleTier tier) {
  std::vector<TrainConfig> schedule;
  if (tier == ScheduleTier::paper) {
    TrainConfig global;
    global.stage = Stage::global_stage;
    global.epochs = 5;
    global.width = 512;
    global.height = 256;
    TrainConfig local = global;
    local.stage = Stage::local_stage;
    local.epochs = 30;
    local.width = 1024;
    local.height = 512;
    TrainConfig face = local;
    face.stage = Stage::face_stage;
    face.epochs = 5;
    schedule = {global, local, face};
  } else {
    TrainConfig global;
    global.stage = Stage::global_stage;
    global.epochs = 30;
    global.width = 128;
    global.height = 64;
    TrainConfig face = global;
    face.stage = Stage::face_stage;
    face.epochs = 5;
    schedule = {global, face};
  }
  return schedule;
}

}  // namespace retarget
