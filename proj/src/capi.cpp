// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "retarget/retarget.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/evaluation.hpp"
#include "core/fakedet.hpp"
#include "core/kv.hpp"
#include "core/manifest.hpp"
#include "core/normalization.hpp"
#include "core/render.hpp"
#include "core/training.hpp"
#include "core/transfer.hpp"

using namespace retarget;

namespace {

thread_local int t_last_code = RT_ERR_NONE;
thread_local std::string t_last_message;

int to_c_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_input: return RT_ERR_MALFORMED_INPUT;
    case ErrorCode::no_person_detected: return RT_ERR_NO_PERSON_DETECTED;
    case ErrorCode::topology_mismatch: return RT_ERR_TOPOLOGY_MISMATCH;
    case ErrorCode::no_common_joints: return RT_ERR_NO_COMMON_JOINTS;
    case ErrorCode::missing_joint: return RT_ERR_MISSING_JOINT;
    case ErrorCode::insufficient_data: return RT_ERR_INSUFFICIENT_DATA;
    case ErrorCode::degenerate_range: return RT_ERR_DEGENERATE_RANGE;
    case ErrorCode::non_positive_height: return RT_ERR_NON_POSITIVE_HEIGHT;
    case ErrorCode::invalid_config: return RT_ERR_INVALID_CONFIG;
    case ErrorCode::out_of_bounds: return RT_ERR_OUT_OF_BOUNDS;
    case ErrorCode::size_mismatch: return RT_ERR_SIZE_MISMATCH;
    case ErrorCode::shape_mismatch: return RT_ERR_SHAPE_MISMATCH;
    case ErrorCode::empty_dataset: return RT_ERR_EMPTY_DATASET;
    case ErrorCode::empty_sequence: return RT_ERR_EMPTY_SEQUENCE;
    case ErrorCode::label_imbalance: return RT_ERR_LABEL_IMBALANCE;
    case ErrorCode::too_few_frames: return RT_ERR_TOO_FEW_FRAMES;
    case ErrorCode::stage_order_violation: return RT_ERR_STAGE_ORDER_VIOLATION;
    case ErrorCode::non_finite_loss: return RT_ERR_NON_FINITE_LOSS;
    case ErrorCode::untrained_model: return RT_ERR_UNTRAINED_MODEL;
    case ErrorCode::no_frames: return RT_ERR_NO_FRAMES;
    case ErrorCode::index_mismatch: return RT_ERR_INDEX_MISMATCH;
    case ErrorCode::invalid_fraction: return RT_ERR_INVALID_FRACTION;
    case ErrorCode::length_mismatch: return RT_ERR_LENGTH_MISMATCH;
    case ErrorCode::io_error: return RT_ERR_IO;
    case ErrorCode::internal: return RT_ERR_INTERNAL;
  }
  return RT_ERR_INTERNAL;
}

template <typename Fn>
rt_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_code = RT_ERR_NONE;
    t_last_message.clear();
    return RT_OK;
  } catch (const Error& e) {
    t_last_code = to_c_code(e.code());
    t_last_message = std::string(error_code_name(e.code())) + ": " + e.what();
    return e.is_validation() ? RT_ERROR_VALIDATION : RT_ERROR_RUNTIME;
  } catch (const std::exception& e) {
    t_last_code = RT_ERR_INTERNAL;
    t_last_message = e.what();
    return RT_ERROR_RUNTIME;
  }
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::invalid_config, what);
}

Split split_from_string(const char* split) {
  if (!split || std::string(split) == "all") return Split::unassigned;
  const std::string s = split;
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  fail(ErrorCode::invalid_config, "unknown split: " + s);
}

std::vector<std::string> list_frames_sorted(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorCode::no_frames, "not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path().string());
  }
  if (files.empty()) fail(ErrorCode::no_frames, "no frames in " + dir);
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

struct rt_config {
  KeyValueFile kv;
  mutable std::string scratch;
};
struct rt_manifest {
  DatasetManifest m;
};
struct rt_stats {
  SubjectStats s;
};
struct rt_pose_seq {
  PoseSequence seq;
};
struct rt_model {
  std::unique_ptr<ModelBundle> bundle;
};

namespace {

ArchConfig arch_from_config(const KeyValueFile& kv) {
  ArchConfig base =
      kv.get_bool_or("toy", false) ? ArchConfig::toy_preset() : ArchConfig::paper_preset();
  KeyValueFile merged;
  base.to_kv(merged, "arch.");
  merged.merge(kv);  // user arch.* keys win
  return ArchConfig::from_kv(merged, "arch.");
}

TrainConfig train_config_from(const KeyValueFile& kv, const ModelBundle& bundle) {
  TrainConfig cfg;
  cfg.stage = stage_from(kv.get_or("train.stage", "global"));
  cfg.epochs = static_cast<int>(kv.get_int_or("train.epochs", 1));
  cfg.width = static_cast<int>(kv.get_int_or("train.width", bundle.arch.image_width));
  cfg.height = static_cast<int>(kv.get_int_or("train.height", bundle.arch.image_height));
  cfg.batch_size = static_cast<int>(kv.get_int_or("train.batch_size", 1));
  cfg.seed = static_cast<uint64_t>(kv.get_int_or("seed", 1));
  cfg.mode = mode_from(kv.get_or("mode", mode_name(bundle.mode)));
  cfg.stride = static_cast<int>(kv.get_int_or("train.stride", 1));
  cfg.optim.lr = kv.get_double_or("train.lr", cfg.optim.lr);
  cfg.optim.beta1 = kv.get_double_or("train.beta1", cfg.optim.beta1);
  cfg.optim.beta2 = kv.get_double_or("train.beta2", cfg.optim.beta2);
  cfg.weights.lambda_fm = kv.get_double_or("loss.lambda_fm", cfg.weights.lambda_fm);
  cfg.weights.lambda_p_global = kv.get_double_or("loss.lambda_p_global", cfg.weights.lambda_p_global);
  cfg.weights.lambda_p_local = kv.get_double_or("loss.lambda_p_local", cfg.weights.lambda_p_local);
  const std::string gan = kv.get_or("loss.gan_mode", "log");
  if (gan == "log")
    cfg.weights.gan_mode = GanMode::log_loss;
  else if (gan == "least-squares" || gan == "least_squares")
    cfg.weights.gan_mode = GanMode::least_squares;
  else
    fail(ErrorCode::invalid_config, "unknown loss.gan_mode: " + gan);
  return cfg;
}

void write_frames(const std::vector<Image>& frames, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (size_t i = 0; i < frames.size(); ++i)
    save_image(frames[i], dir + "/" + frame_file_name(static_cast<int64_t>(i)));
}

}  // namespace

extern "C" {

RT_API int rt_last_error_code(void) { return t_last_code; }
RT_API const char* rt_last_error_message(void) { return t_last_message.c_str(); }
RT_API const char* rt_version(void) { return "0.1.0"; }

/* ---- config ---- */

RT_API rt_status rt_config_create(rt_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new rt_config();
  });
}

RT_API rt_status rt_config_load(const char* path, rt_config** out) {
  return guarded([&] {
    require(path && out, "path or out is null");
    auto cfg = std::make_unique<rt_config>();
    cfg->kv = KeyValueFile::load(path);
    *out = cfg.release();
  });
}

RT_API rt_status rt_config_set(rt_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    config->kv.set(key, value);
  });
}

RT_API const char* rt_config_get(const rt_config* config, const char* key) {
  if (!config || !key) return nullptr;
  auto v = config->kv.get(key);
  if (!v) return nullptr;
  config->scratch = *v;
  return config->scratch.c_str();
}

RT_API rt_status rt_config_save(const rt_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    config->kv.save(path);
  });
}

RT_API void rt_config_free(rt_config* config) { delete config; }

/* ---- manifests ---- */

RT_API rt_status rt_ingest(const char* frames_dir, const char* poses_dir, double fps,
                           int downsample, const char* subject_id, rt_manifest** out) {
  return guarded([&] {
    require(frames_dir && poses_dir && out, "null argument");
    auto m = std::make_unique<rt_manifest>();
    m->m = ingest_dataset(frames_dir, poses_dir, fps, downsample,
                          subject_id ? subject_id : "subject");
    *out = m.release();
  });
}

RT_API rt_status rt_manifest_load(const char* path, rt_manifest** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto m = std::make_unique<rt_manifest>();
    m->m = load_manifest(path);
    *out = m.release();
  });
}

RT_API rt_status rt_manifest_save(const rt_manifest* manifest, const char* path) {
  return guarded([&] {
    require(manifest && path, "null argument");
    save_manifest(manifest->m, path);
  });
}

RT_API rt_status rt_manifest_split(const rt_manifest* manifest, double train_fraction,
                                   rt_manifest** out) {
  return guarded([&] {
    require(manifest && out, "null argument");
    auto m = std::make_unique<rt_manifest>();
    m->m = split_dataset(manifest->m, train_fraction);
    *out = m.release();
  });
}

RT_API int64_t rt_manifest_entry_count(const rt_manifest* manifest) {
  return manifest ? static_cast<int64_t>(manifest->m.entries.size()) : 0;
}

RT_API int64_t rt_manifest_usable_count(const rt_manifest* manifest) {
  return manifest ? static_cast<int64_t>(manifest->m.count_usable()) : 0;
}

RT_API void rt_manifest_free(rt_manifest* manifest) { delete manifest; }

RT_API rt_status rt_render_poses(const rt_manifest* manifest, const char* out_dir, int width,
                                 int height) {
  return guarded([&] {
    require(manifest && out_dir, "null argument");
    TrainDataset data = TrainDataset::load(manifest->m, Split::unassigned, width, height);
    std::filesystem::create_directories(out_dir);
    for (size_t i = 0; i < data.size(); ++i)
      save_image(data.pose_images[i],
                 std::string(out_dir) + "/" + frame_file_name(data.frame_indices[i]));
  });
}

/* ---- stats and pose sequences ---- */

RT_API rt_status rt_compute_stats(const rt_manifest* manifest, const char* split, double alpha,
                                  int use_literal_far_rule, rt_stats** out) {
  return guarded([&] {
    require(manifest && out, "null argument");
    PoseSequence seq = manifest_pose_sequence(manifest->m, split_from_string(split));
    auto s = std::make_unique<rt_stats>();
    s->s = compute_subject_stats(
        seq, alpha, use_literal_far_rule ? FarPositionRule::literal : FarPositionRule::prose);
    s->s.subject_id = manifest->m.subject_id;
    *out = s.release();
  });
}

RT_API rt_status rt_stats_load(const char* path, rt_stats** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto s = std::make_unique<rt_stats>();
    s->s = load_subject_stats(path);
    *out = s.release();
  });
}

RT_API rt_status rt_stats_save(const rt_stats* stats, const char* path) {
  return guarded([&] {
    require(stats && path, "null argument");
    save_subject_stats(stats->s, path);
  });
}

RT_API rt_status rt_stats_get(const rt_stats* stats, const char* field, double* out) {
  return guarded([&] {
    require(stats && field && out, "null argument");
    const std::string f = field;
    if (f == "close_y") *out = stats->s.close_y;
    else if (f == "far_y") *out = stats->s.far_y;
    else if (f == "height_close") *out = stats->s.height_close;
    else if (f == "height_far") *out = stats->s.height_far;
    else if (f == "median_y") *out = stats->s.median_y;
    else if (f == "alpha") *out = stats->s.alpha;
    else fail(ErrorCode::invalid_config, "unknown stats field: " + f);
  });
}

RT_API void rt_stats_free(rt_stats* stats) { delete stats; }

RT_API rt_status rt_pose_seq_load_dir(const char* poses_dir, double fps, rt_pose_seq** out) {
  return guarded([&] {
    require(poses_dir && out, "null argument");
    namespace fs = std::filesystem;
    if (!fs::is_directory(poses_dir))
      fail(ErrorCode::io_error, std::string("not a directory: ") + poses_dir);
    std::map<int64_t, std::string> files;
    for (const auto& entry : fs::directory_iterator(poses_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      const std::string stem = entry.path().stem().string();
      const size_t us = stem.rfind("_keypoints");
      if (stem.rfind("frame_", 0) != 0 || us == std::string::npos) continue;
      files[std::stoll(stem.substr(6, us - 6))] = entry.path().string();
    }
    if (files.empty()) fail(ErrorCode::empty_sequence, std::string("no pose files in ") + poses_dir);
    auto seq = std::make_unique<rt_pose_seq>();
    seq->seq.fps = fps;
    for (const auto& [index, path] : files) {
      std::ifstream in(path);
      std::ostringstream buf;
      buf << in.rdbuf();
      seq->seq.poses.push_back(parse_detector_frame(buf.str(), SkeletonTopology::body25()));
      seq->seq.frame_indices.push_back(index);
    }
    *out = seq.release();
  });
}

RT_API rt_status rt_pose_seq_from_manifest(const rt_manifest* manifest, const char* split,
                                           rt_pose_seq** out) {
  return guarded([&] {
    require(manifest && out, "null argument");
    auto seq = std::make_unique<rt_pose_seq>();
    seq->seq = manifest_pose_sequence(manifest->m, split_from_string(split));
    *out = seq.release();
  });
}

RT_API int64_t rt_pose_seq_size(const rt_pose_seq* seq) {
  return seq ? static_cast<int64_t>(seq->seq.size()) : 0;
}

RT_API void rt_pose_seq_free(rt_pose_seq* seq) { delete seq; }

/* ---- models and training ---- */

RT_API rt_status rt_model_create(const rt_config* config, rt_model** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    KeyValueFile kv;
    if (config) kv = config->kv;
    const ArchConfig arch = arch_from_config(kv);
    const Mode mode = mode_from(kv.get_or("mode", "fbf-ts-fg"));
    const uint64_t seed = static_cast<uint64_t>(kv.get_int_or("seed", 1));
    auto m = std::make_unique<rt_model>();
    m->bundle = ModelBundle::create(arch, mode, seed);
    *out = m.release();
  });
}

RT_API rt_status rt_model_load(const char* path, rt_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto m = std::make_unique<rt_model>();
    m->bundle = load_model_bundle(path);
    *out = m.release();
  });
}

RT_API rt_status rt_model_save(const rt_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    save_model_bundle(*model->bundle, path);
  });
}

RT_API void rt_model_free(rt_model* model) { delete model; }

RT_API rt_status rt_train(rt_model* model, const rt_manifest* manifest, const rt_config* config,
                          const char* checkpoint_dir, const char* metrics_path) {
  return guarded([&] {
    require(model && manifest, "null argument");
    KeyValueFile kv;
    if (config) kv = config->kv;
    const TrainConfig cfg = train_config_from(kv, *model->bundle);
    MetricsLog log(metrics_path ? metrics_path : "");
    train(*model->bundle, manifest->m, cfg, &log, checkpoint_dir ? checkpoint_dir : "");
  });
}

RT_API rt_status rt_train_schedule(rt_model* model, const rt_manifest* manifest,
                                   const rt_config* config, const char* tier,
                                   const char* checkpoint_dir, const char* metrics_path) {
  return guarded([&] {
    require(model && manifest && tier, "null argument");
    const std::string t = tier;
    require(t == "paper" || t == "toy", "tier must be \"paper\" or \"toy\"");
    KeyValueFile kv;
    if (config) kv = config->kv;
    MetricsLog log(metrics_path ? metrics_path : "");
    for (TrainConfig cfg : paper_schedule(t == "paper" ? ScheduleTier::paper : ScheduleTier::toy)) {
      // Schedule entries define stage, resolution and epochs; everything
      // else follows the run config.
      TrainConfig merged = train_config_from(kv, *model->bundle);
      merged.stage = cfg.stage;
      merged.epochs = static_cast<int>(kv.get_int_or(
          std::string("train.") + stage_name(cfg.stage) + ".epochs", cfg.epochs));
      merged.width = cfg.width;
      merged.height = cfg.height;
      if (merged.stage == Stage::face_stage && !mode_has_face(merged.mode)) continue;
      train(*model->bundle, manifest->m, merged, &log, checkpoint_dir ? checkpoint_dir : "");
    }
  });
}

/* ---- transfer ---- */

RT_API rt_status rt_transfer(const rt_model* model, const rt_pose_seq* source_poses,
                             const rt_stats* source_stats, const rt_stats* target_stats,
                             const char* mode, int target_width, int target_height,
                             const char* out_dir, const rt_config* provenance) {
  return guarded([&] {
    require(model && source_poses && source_stats && target_stats && mode && out_dir,
            "null argument");
    TransferResult result =
        transfer_video(source_poses->seq, source_stats->s, target_stats->s, *model->bundle,
                       mode_from(mode), target_width, target_height);
    write_frames(result.frames, out_dir);
    KeyValueFile meta;
    meta.set("kind", "retarget-transfer");
    meta.set("mode", mode);
    meta.set_int("frames", static_cast<int64_t>(result.frames.size()));
    meta.set_int("width", model->bundle->arch.image_width);
    meta.set_int("height", model->bundle->arch.image_height);
    if (provenance) meta.merge(provenance->kv);
    meta.save(std::string(out_dir) + "/transfer.meta");
  });
}

RT_API rt_status rt_nn_baseline(const rt_pose_seq* source_poses, const rt_manifest* target,
                                const rt_stats* source_stats, const rt_stats* target_stats,
                                const char* out_dir, const char* indices_path) {
  return guarded([&] {
    require(source_poses && target && out_dir, "null argument");
    require((source_stats == nullptr) == (target_stats == nullptr),
            "pass both stats or neither");
    PoseSequence target_poses = manifest_pose_sequence(target->m, Split::train);
    if (target_poses.poses.empty())
      target_poses = manifest_pose_sequence(target->m, Split::unassigned);
    std::vector<Image> target_frames;
    {
      auto entries = target->m.usable_entries(Split::train);
      if (entries.empty()) entries = target->m.usable_entries(Split::unassigned);
      for (const auto* e : entries) target_frames.push_back(load_image(e->frame_path));
    }
    std::optional<SubjectStats> src, tgt;
    if (source_stats) src = source_stats->s;
    if (target_stats) tgt = target_stats->s;
    NnBaselineResult result =
        nn_baseline_video(source_poses->seq, target_poses, target_frames, src, tgt);
    write_frames(result.frames, out_dir);
    if (indices_path) {
      std::ofstream out(indices_path);
      if (!out) fail(ErrorCode::io_error, std::string("cannot write ") + indices_path);
      for (size_t i = 0; i < result.matched_indices.size(); ++i)
        out << i << "\t" << result.matched_indices[i] << "\n";
    }
  });
}

/* ---- evaluation ---- */

RT_API rt_status rt_evaluate(const char* pred_dir, const rt_manifest* gt_manifest,
                             const char* split, int face_size, const char* report_path) {
  return guarded([&] {
    require(pred_dir && gt_manifest && report_path, "null argument");
    const std::vector<std::string> pred_files = list_frames_sorted(pred_dir);
    std::vector<Image> preds;
    for (const auto& f : pred_files) preds.push_back(load_image(f));
    const int width = preds.front().width, height = preds.front().height;

    TrainDataset gt =
        TrainDataset::load(gt_manifest->m, split_from_string(split), width, height);
    if (gt.size() != preds.size())
      fail(ErrorCode::length_mismatch,
           "prediction count " + std::to_string(preds.size()) + " != ground truth count " +
               std::to_string(gt.size()));
    SequenceReport report = evaluate_sequence(preds, gt.frames, gt.poses, face_size);
    save_report(report, report_path);
  });
}

namespace {
rt_lpips_fn g_c_lpips = nullptr;
void* g_c_lpips_user = nullptr;

std::vector<unsigned char> to_rgb_bytes(const Image& img) {
  std::vector<unsigned char> rgb(static_cast<size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[(static_cast<size_t>(y) * img.width + x) * 3 + c] = float_to_byte(img.at(c, y, x));
  return rgb;
}
}  // namespace

RT_API rt_status rt_register_lpips(rt_lpips_fn fn, void* user) {
  return guarded([&] {
    g_c_lpips = fn;
    g_c_lpips_user = user;
    if (!fn) {
      clear_lpips_plugin();
      return;
    }
    register_lpips_plugin([](const Image& a, const Image& b) {
      const auto ra = to_rgb_bytes(a);
      const auto rb = to_rgb_bytes(b);
      return g_c_lpips(ra.data(), rb.data(), a.width, a.height, g_c_lpips_user);
    });
  });
}

/* ---- fake detection ---- */

RT_API rt_status rt_fakedet_build(const char* const* real_manifest_paths, int n_real,
                                  const char* const* fake_manifest_paths, int n_fake, int stride,
                                  const char* const* test_subjects, int n_test_subjects,
                                  const char* out_dataset_path) {
  return guarded([&] {
    require(out_dataset_path != nullptr, "out_dataset_path is null");
    require(n_real >= 0 && n_fake >= 0 && n_test_subjects >= 0, "negative count");
    std::vector<DatasetManifest> real, fake;
    for (int i = 0; i < n_real; ++i) real.push_back(load_manifest(real_manifest_paths[i]));
    for (int i = 0; i < n_fake; ++i) fake.push_back(load_manifest(fake_manifest_paths[i]));
    std::vector<std::string> test;
    for (int i = 0; i < n_test_subjects; ++i) test.emplace_back(test_subjects[i]);
    FakePairDataset ds = build_fake_dataset(real, fake, stride, test);
    ds.save(out_dataset_path);
  });
}

RT_API rt_status rt_fakedet_train(const char* dataset_path, const rt_config* config,
                                  const char* detector_checkpoint_path,
                                  double* heldout_accuracy) {
  return guarded([&] {
    require(dataset_path && detector_checkpoint_path, "null argument");
    KeyValueFile kv;
    if (config) kv = config->kv;
    FakePairDataset ds = FakePairDataset::load(dataset_path);
    DetectorTrainConfig cfg;
    cfg.epochs = static_cast<int>(kv.get_int_or("fakedet.epochs", cfg.epochs));
    cfg.batch_size = static_cast<int>(kv.get_int_or("fakedet.batch_size", cfg.batch_size));
    cfg.seed = static_cast<uint64_t>(kv.get_int_or("seed", cfg.seed));
    cfg.lr = kv.get_double_or("fakedet.lr", cfg.lr);
    cfg.width = static_cast<int>(kv.get_int_or("fakedet.width", cfg.width));
    cfg.height = static_cast<int>(kv.get_int_or("fakedet.height", cfg.height));
    cfg.base_width = static_cast<int>(kv.get_int_or("fakedet.base_width", cfg.base_width));
    cfg.n_layers = static_cast<int>(kv.get_int_or("fakedet.n_layers", cfg.n_layers));
    DetectorMetrics metrics;
    auto model = train_fake_detector(ds, cfg, &metrics);
    save_detector(*model, detector_checkpoint_path);
    if (heldout_accuracy) *heldout_accuracy = metrics.heldout_accuracy;
  });
}

RT_API rt_status rt_fakedet_classify(const char* detector_checkpoint_path,
                                     const char* frames_dir, const char* report_path,
                                     double* video_probability_real, int* label_real) {
  return guarded([&] {
    require(detector_checkpoint_path && frames_dir, "null argument");
    auto detector = load_detector(detector_checkpoint_path);
    std::vector<Image> frames;
    for (const auto& f : list_frames_sorted(frames_dir)) {
      Image img = load_image(f);
      while (img.width > detector->width && img.height > detector->height &&
             img.width % 2 == 0 && img.height % 2 == 0)
        img = downsample_half(img);
      frames.push_back(std::move(img));
    }
    VideoClassification result = classify_video(frames, *detector);
    if (report_path) save_classification_report(result, report_path);
    if (video_probability_real) *video_probability_real = result.video_probability_real;
    if (label_real) *label_real = result.label_real ? 1 : 0;
  });
}

}  // extern "C"
