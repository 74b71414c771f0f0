/* Copyright (C) 2026 the retarget authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of libretarget, a pose-driven video motion-transfer pipeline:
 * dataset ingestion, per-subject pose statistics, stick-figure rendering,
 * staged adversarial training, motion transfer with a nearest-neighbor
 * baseline, region metrics, and a synthetic-video detector.
 *
 * All functions return rt_status. On failure, rt_last_error_message() and
 * rt_last_error_code() describe the error (per thread). Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching *_free function. Handles are opaque.
 */

#ifndef RETARGET_H
#define RETARGET_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef RT_API
#define RT_API __attribute__((visibility("default")))
#endif

typedef enum rt_status {
  RT_OK = 0,
  RT_ERROR_VALIDATION = 1, /* bad input, bad config, contract violations */
  RT_ERROR_RUNTIME = 2     /* I/O failures, non-finite losses, internal errors */
} rt_status;

/* Fine-grained code of the most recent error on the calling thread. */
enum {
  RT_ERR_NONE = 0,
  RT_ERR_MALFORMED_INPUT,
  RT_ERR_NO_PERSON_DETECTED,
  RT_ERR_TOPOLOGY_MISMATCH,
  RT_ERR_NO_COMMON_JOINTS,
  RT_ERR_MISSING_JOINT,
  RT_ERR_INSUFFICIENT_DATA,
  RT_ERR_DEGENERATE_RANGE,
  RT_ERR_NON_POSITIVE_HEIGHT,
  RT_ERR_INVALID_CONFIG,
  RT_ERR_OUT_OF_BOUNDS,
  RT_ERR_SIZE_MISMATCH,
  RT_ERR_SHAPE_MISMATCH,
  RT_ERR_EMPTY_DATASET,
  RT_ERR_EMPTY_SEQUENCE,
  RT_ERR_LABEL_IMBALANCE,
  RT_ERR_TOO_FEW_FRAMES,
  RT_ERR_STAGE_ORDER_VIOLATION,
  RT_ERR_NON_FINITE_LOSS,
  RT_ERR_UNTRAINED_MODEL,
  RT_ERR_NO_FRAMES,
  RT_ERR_INDEX_MISMATCH,
  RT_ERR_INVALID_FRACTION,
  RT_ERR_LENGTH_MISMATCH,
  RT_ERR_IO,
  RT_ERR_INTERNAL
};

RT_API int rt_last_error_code(void);
RT_API const char* rt_last_error_message(void);
RT_API const char* rt_version(void);

typedef struct rt_config rt_config;
typedef struct rt_manifest rt_manifest;
typedef struct rt_stats rt_stats;
typedef struct rt_pose_seq rt_pose_seq;
typedef struct rt_model rt_model;

/* ------------------------------------------------------------------ */
/* Run configuration: "key = value" text files; later set() overrides. */

RT_API rt_status rt_config_create(rt_config** out);
RT_API rt_status rt_config_load(const char* path, rt_config** out);
RT_API rt_status rt_config_set(rt_config* config, const char* key, const char* value);
/* Returns NULL when the key is absent; the pointer is valid until the next
 * call on this config. */
RT_API const char* rt_config_get(const rt_config* config, const char* key);
RT_API rt_status rt_config_save(const rt_config* config, const char* path);
RT_API void rt_config_free(rt_config* config);

/* ------------------------------------------------------------------ */
/* Dataset manifests.                                                  */

/* Pairs frame_XXXXXX.png|.ppm files with frame_XXXXXX_keypoints.json files.
 * downsample keeps every downsample-th frame and divides the stored fps. */
RT_API rt_status rt_ingest(const char* frames_dir, const char* poses_dir, double fps,
                           int downsample, const char* subject_id, rt_manifest** out);
RT_API rt_status rt_manifest_load(const char* path, rt_manifest** out);
RT_API rt_status rt_manifest_save(const rt_manifest* manifest, const char* path);
/* First floor(N * train_fraction) entries become the training split (the
 * footage is temporal; the split is a contiguous prefix). */
RT_API rt_status rt_manifest_split(const rt_manifest* manifest, double train_fraction,
                                   rt_manifest** out);
RT_API int64_t rt_manifest_entry_count(const rt_manifest* manifest);
RT_API int64_t rt_manifest_usable_count(const rt_manifest* manifest);
RT_API void rt_manifest_free(rt_manifest* manifest);

/* Renders the stick figure of every usable entry into out_dir. */
RT_API rt_status rt_render_poses(const rt_manifest* manifest, const char* out_dir, int width,
                                 int height);

/* ------------------------------------------------------------------ */
/* Subject statistics and pose sequences.                              */

/* split: "train", "test" or "all". use_literal_far_rule selects the
 * alternative far-position formula (see docs/config.md). */
RT_API rt_status rt_compute_stats(const rt_manifest* manifest, const char* split, double alpha,
                                  int use_literal_far_rule, rt_stats** out);
RT_API rt_status rt_stats_load(const char* path, rt_stats** out);
RT_API rt_status rt_stats_save(const rt_stats* stats, const char* path);
/* field: close_y, far_y, height_close, height_far, median_y, alpha */
RT_API rt_status rt_stats_get(const rt_stats* stats, const char* field, double* out);
RT_API void rt_stats_free(rt_stats* stats);

RT_API rt_status rt_pose_seq_load_dir(const char* poses_dir, double fps, rt_pose_seq** out);
RT_API rt_status rt_pose_seq_from_manifest(const rt_manifest* manifest, const char* split,
                                           rt_pose_seq** out);
RT_API int64_t rt_pose_seq_size(const rt_pose_seq* seq);
RT_API void rt_pose_seq_free(rt_pose_seq* seq);

/* ------------------------------------------------------------------ */
/* Models and training.                                                */

/* Builds an untrained bundle from config keys (arch.*, mode, seed); the
 * "toy" key selects the CPU-scale preset. */
RT_API rt_status rt_model_create(const rt_config* config, rt_model** out);
RT_API rt_status rt_model_load(const char* path, rt_model** out);
RT_API rt_status rt_model_save(const rt_model* model, const char* path);
RT_API void rt_model_free(rt_model* model);

/* Trains the stage named by train.stage with the train.* keys; writes one
 * checkpoint per epoch into checkpoint_dir (optional) and appends metrics
 * rows to metrics_path (optional). */
RT_API rt_status rt_train(rt_model* model, const rt_manifest* manifest, const rt_config* config,
                          const char* checkpoint_dir, const char* metrics_path);
/* Runs the staged schedule: tier "paper" (global 5, local 30, face 5 epochs)
 * or "toy". */
RT_API rt_status rt_train_schedule(rt_model* model, const rt_manifest* manifest,
                                   const rt_config* config, const char* tier,
                                   const char* checkpoint_dir, const char* metrics_path);

/* ------------------------------------------------------------------ */
/* Transfer and baseline.                                              */

/* mode: "fbf", "fbf-ts" or "fbf-ts-fg". target_width/height give the
 * coordinate frame of the target statistics (0 = generation resolution).
 * Writes frame_XXXXXX.png plus a transfer.meta provenance file; provenance
 * keys (nullable) are copied into that file. */
RT_API rt_status rt_transfer(const rt_model* model, const rt_pose_seq* source_poses,
                             const rt_stats* source_stats, const rt_stats* target_stats,
                             const char* mode, int target_width, int target_height,
                             const char* out_dir, const rt_config* provenance);

/* Nearest-neighbor baseline over the target manifest's training split.
 * Pass both stats to pose-normalize the source first, or neither. Writes
 * matched frames into out_dir and, optionally, the matched target frame
 * indices as text. */
RT_API rt_status rt_nn_baseline(const rt_pose_seq* source_poses, const rt_manifest* target,
                                const rt_stats* source_stats, const rt_stats* target_stats,
                                const char* out_dir, const char* indices_path);

/* ------------------------------------------------------------------ */
/* Evaluation.                                                         */

/* Scores predicted frames (frame_XXXXXX.png in pred_dir, in split order)
 * against the manifest's frames; writes a per-frame report with face and
 * body region scores plus aggregate means. */
RT_API rt_status rt_evaluate(const char* pred_dir, const rt_manifest* gt_manifest,
                             const char* split, int face_size, const char* report_path);

/* Optional learned perceptual metric plug-in. Both buffers are 8-bit RGB,
 * row-major, width*height*3 bytes. Pass NULL to unregister. */
typedef double (*rt_lpips_fn)(const unsigned char* rgb_a, const unsigned char* rgb_b, int width,
                              int height, void* user);
RT_API rt_status rt_register_lpips(rt_lpips_fn fn, void* user);

/* ------------------------------------------------------------------ */
/* Fake detection.                                                     */

/* Builds a balanced pair dataset from real and synthesized manifests with a
 * subject-disjoint held-out split, and writes it as text. */
RT_API rt_status rt_fakedet_build(const char* const* real_manifest_paths, int n_real,
                                  const char* const* fake_manifest_paths, int n_fake, int stride,
                                  const char* const* test_subjects, int n_test_subjects,
                                  const char* out_dataset_path);

/* Trains the pair classifier (fakedet.* config keys) and stores its
 * checkpoint; reports held-out pair accuracy when the dataset has a test
 * split. */
RT_API rt_status rt_fakedet_train(const char* dataset_path, const rt_config* config,
                                  const char* detector_checkpoint_path,
                                  double* heldout_accuracy);

/* Classifies the video in frames_dir: per-pair probabilities are multiplied
 * in log space into the video statistic; the label compares the product of
 * p(real) against the product of p(fake). */
RT_API rt_status rt_fakedet_classify(const char* detector_checkpoint_path,
                                     const char* frames_dir, const char* report_path,
                                     double* video_probability_real, int* label_real);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RETARGET_H */
