// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/render.hpp"
#include "core/synthdata.hpp"
#include "core/training.hpp"
#include "core/transfer.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

struct ToyWorld {
  testutil::TempDir dir{"transfer"};
  DatasetManifest manifest;
  std::unique_ptr<ModelBundle> bundle;
  SubjectStats stats;

  explicit ToyWorld(int n_frames = 8, int train_epochs = 1) {
    SynthSubjectConfig cfg;
    cfg.subject_id = "mover";
    cfg.n_frames = n_frames;
    write_synth_dataset(cfg, dir / "frames", dir / "poses");
    manifest = ingest_dataset(dir / "frames", dir / "poses", 30.0, 1, "mover");
    bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 9);
    TrainConfig tc;
    tc.stage = Stage::global_stage;
    tc.epochs = train_epochs;
    tc.width = 128;
    tc.height = 64;
    tc.seed = 9;
    train(*bundle, manifest, tc);
    stats = compute_subject_stats(manifest_pose_sequence(manifest), 0.7);
  }
};

}  // namespace

TEST_CASE("transfer: single-frame base case with zero-image conditioning") {
  ToyWorld world;
  PoseSequence one;
  one.fps = 30;
  one.poses.push_back(synth_pose(SynthSubjectConfig{}, 3));
  one.frame_indices.push_back(0);

  int calls = 0;
  TransferHooks hooks;
  hooks.on_generator_input = [&](size_t frame, const Image& prev) {
    CHECK(frame == 0);
    for (float v : prev.data) REQUIRE(v == 0.0f);
    ++calls;
  };
  const TransferResult out = transfer_video(one, world.stats, world.stats, *world.bundle,
                                            Mode::fbf_ts, 0, 0, &hooks);
  CHECK(out.frames.size() == 1);
  CHECK(calls == 1);
  CHECK(out.frames[0].width == 128);
  CHECK(out.frames[0].height == 64);
}

TEST_CASE("transfer: output length equals input length; deterministic") {
  ToyWorld world;
  const PoseSequence source = synth_pose_sequence(SynthSubjectConfig{});
  const TransferResult a =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts);
  CHECK(a.frames.size() == source.size());
  const TransferResult b =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts);
  for (size_t i = 0; i < a.frames.size(); ++i) CHECK(a.frames[i].data == b.frames[i].data);
}

TEST_CASE("transfer: FBF and FBF_TS differ exactly in the conditioning input") {
  ToyWorld world;
  PoseSequence source = synth_pose_sequence(SynthSubjectConfig{});
  source.poses.resize(3);
  source.frame_indices.resize(3);

  std::vector<Image> ts_prev, fbf_prev;
  TransferHooks hooks;
  hooks.on_generator_input = [&](size_t, const Image& prev) { ts_prev.push_back(prev); };
  const auto ts =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts, 0, 0, &hooks);
  hooks.on_generator_input = [&](size_t, const Image& prev) { fbf_prev.push_back(prev); };
  transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf, 0, 0, &hooks);

  REQUIRE(ts_prev.size() == 3);
  REQUIRE(fbf_prev.size() == 3);
  // Both start from the zero image.
  for (float v : ts_prev[0].data) CHECK(v == 0.0f);
  // Temporal mode chains the previous generated frame; FBF keeps zeros.
  CHECK(ts_prev[1].data == ts.frames[0].data);
  CHECK(ts_prev[2].data == ts.frames[1].data);
  for (float v : fbf_prev[1].data) CHECK(v == 0.0f);
  for (float v : fbf_prev[2].data) CHECK(v == 0.0f);
}

TEST_CASE("transfer: sequential dependency (frames before a perturbation are bit-identical)") {
  ToyWorld world;
  PoseSequence source = synth_pose_sequence(SynthSubjectConfig{});
  source.poses.resize(6);
  source.frame_indices.resize(6);

  const auto base =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts);
  PoseSequence perturbed = source;
  const size_t k = 3;
  for (auto& kp : perturbed.poses[k].keypoints) kp.x += 2.0;
  const auto changed =
      transfer_video(perturbed, world.stats, world.stats, *world.bundle, Mode::fbf_ts);

  for (size_t i = 0; i < k; ++i) CHECK(base.frames[i].data == changed.frames[i].data);
  CHECK(base.frames[k].data != changed.frames[k].data);
}

TEST_CASE("transfer: missing-ankle frames reuse the previous normalization") {
  ToyWorld world;
  SynthSubjectConfig cfg;
  cfg.drop_ankle_at = {2};
  PoseSequence source = synth_pose_sequence(cfg);
  source.poses.resize(4);
  source.frame_indices.resize(4);

  const auto out =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts);
  CHECK(out.frames.size() == 4);
  // The dropped-ankle pose is still rendered (partial stick figure) and its
  // normalized pose keeps the previous frame's transform; with identical
  // src/tgt stats the transform is identity, so present joints are unmoved.
  const auto& norm = out.normalized_poses[2];
  CHECK(!norm.present(norm.topology->left_ankle));
  CHECK(norm.joint(0).x == doctest::Approx(source.poses[2].joint(0).x).epsilon(1e-9));
}

TEST_CASE("transfer: untrained model and empty input are rejected") {
  auto bundle = ModelBundle::create(ArchConfig::toy_preset(), Mode::fbf_ts_fg, 1);
  const PoseSequence source = synth_pose_sequence(SynthSubjectConfig{});
  std::mt19937_64 rng(1);
  const SubjectStats s = testutil::random_valid_stats(rng);
  CHECK_THROWS_AS(transfer_video(source, s, s, *bundle, Mode::fbf_ts), Error);

  ToyWorld world;
  PoseSequence empty;
  CHECK_THROWS_AS(transfer_video(empty, world.stats, world.stats, *world.bundle, Mode::fbf_ts),
                  Error);
  // FG transfer needs the face stage.
  CHECK_THROWS_AS(transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts_fg),
                  Error);
}

TEST_CASE("transfer: FG mode composites the face region only") {
  ToyWorld world;
  TrainConfig face;
  face.stage = Stage::face_stage;
  face.epochs = 1;
  face.width = 128;
  face.height = 64;
  face.seed = 9;
  train(*world.bundle, world.manifest, face);

  PoseSequence source = synth_pose_sequence(SynthSubjectConfig{});
  source.poses.resize(2);
  source.frame_indices.resize(2);
  const auto plain =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts);
  const auto with_face =
      transfer_video(source, world.stats, world.stats, *world.bundle, Mode::fbf_ts_fg);

  // Outside the 32x32 face box the frames agree bit-exactly.
  const Pose& norm = with_face.normalized_poses[0];
  const FaceBox box = face_box(norm, 32, 128, 64);
  int inside_diff = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 128; ++x) {
      const bool inside = x >= box.x0 && x < box.x1 && y >= box.y0 && y < box.y1;
      for (int c = 0; c < 3; ++c) {
        if (inside) {
          inside_diff += plain.frames[0].at(c, y, x) != with_face.frames[0].at(c, y, x);
        } else {
          CHECK(plain.frames[0].at(c, y, x) == with_face.frames[0].at(c, y, x));
        }
      }
    }
  CHECK(inside_diff > 0);  // the residual actually changed the face
}

TEST_CASE("nn baseline: exact match, tie-break, and brute-force oracle") {
  std::mt19937_64 rng(55);
  PoseSequence target;
  target.fps = 30;
  for (int i = 0; i < 60; ++i) {
    target.poses.push_back(testutil::full_body25_pose(rng));
    target.frame_indices.push_back(i);
  }

  // Exact copy of target pose 17 retrieves index 17.
  PoseSequence source;
  source.fps = 30;
  source.poses.push_back(target.poses[17]);
  source.frame_indices.push_back(0);
  auto result = nn_baseline_video(source, target, {}, std::nullopt, std::nullopt);
  CHECK(result.matched_indices == std::vector<size_t>{17});

  // Symmetric tie: two equidistant targets, the lower index wins.
  PoseSequence two;
  two.fps = 30;
  Pose base = testutil::full_body25_pose(rng);
  Pose left = base, right = base;
  for (auto& kp : left.keypoints) kp.x -= 3.0;
  for (auto& kp : right.keypoints) kp.x += 3.0;
  two.poses = {left, right};
  two.frame_indices = {0, 1};
  PoseSequence query;
  query.fps = 30;
  query.poses.push_back(base);
  query.frame_indices.push_back(0);
  CHECK(nn_baseline_video(query, two, {}, std::nullopt, std::nullopt).matched_indices ==
        std::vector<size_t>{0});

  // Small brute-force oracle sweep.
  PoseSequence queries;
  queries.fps = 30;
  for (int i = 0; i < 15; ++i) {
    queries.poses.push_back(testutil::full_body25_pose(rng));
    queries.frame_indices.push_back(i);
  }
  result = nn_baseline_video(queries, target, {}, std::nullopt, std::nullopt);
  for (size_t q = 0; q < queries.poses.size(); ++q) {
    double best = 1e300;
    size_t best_idx = 0;
    for (size_t t = 0; t < target.poses.size(); ++t) {
      const double d = pose_distance(queries.poses[q], target.poses[t]);
      if (d < best) {
        best = d;
        best_idx = t;
      }
    }
    CHECK(result.matched_indices[q] == best_idx);
  }
}

TEST_CASE("nn baseline: frames are concatenated in source order; errors") {
  std::mt19937_64 rng(56);
  PoseSequence target;
  target.fps = 30;
  std::vector<Image> frames;
  for (int i = 0; i < 5; ++i) {
    target.poses.push_back(testutil::full_body25_pose(rng));
    target.frame_indices.push_back(i);
    frames.emplace_back(8, 8, 3, static_cast<float>(i) / 5.0f);
  }
  PoseSequence source;
  source.fps = 30;
  source.poses = {target.poses[4], target.poses[1]};
  source.frame_indices = {0, 1};
  const auto result = nn_baseline_video(source, target, frames, std::nullopt, std::nullopt);
  REQUIRE(result.frames.size() == 2);
  CHECK(result.frames[0].data == frames[4].data);
  CHECK(result.frames[1].data == frames[1].data);

  PoseSequence empty;
  CHECK_THROWS_AS(nn_baseline_video(source, empty, {}, std::nullopt, std::nullopt), Error);
  CHECK_THROWS_AS(nn_baseline_video(empty, target, {}, std::nullopt, std::nullopt), Error);
}

TEST_CASE("nn baseline: optional normalization uses both stats") {
  std::mt19937_64 rng(57);
  PoseSequence target;
  target.fps = 30;
  for (int i = 0; i < 10; ++i) {
    target.poses.push_back(testutil::full_body25_pose(rng));
    target.frame_indices.push_back(i);
  }
  PoseSequence source;
  source.fps = 30;
  source.poses.push_back(testutil::full_body25_pose(rng));
  source.frame_indices.push_back(0);

  const SubjectStats src = testutil::random_valid_stats(rng);
  const SubjectStats tgt = testutil::random_valid_stats(rng);
  const auto normalized = nn_baseline_video(source, target, {}, src, tgt);
  const auto raw = nn_baseline_video(source, target, {}, std::nullopt, std::nullopt);
  CHECK(normalized.matched_indices.size() == 1);
  CHECK(raw.matched_indices.size() == 1);
  // With identical stats, normalization is the identity and matches the raw run.
  const auto same = nn_baseline_video(source, target, {}, src, src);
  CHECK(same.matched_indices == raw.matched_indices);
}
