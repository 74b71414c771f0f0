// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/normalization.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

// Sequence whose usable frames have the given average ankle ys. Heights are
// arranged per-frame via the nose unless overridden.
PoseSequence sequence_with_ankle_ys(const std::vector<double>& ys, double height = 50.0) {
  PoseSequence seq;
  seq.fps = 30.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    Pose p = Pose::empty(SkeletonTopology::body25());
    p.joint(11) = {100, ys[i], 1.0};
    p.joint(14) = {100, ys[i], 1.0};
    p.joint(0) = {100, ys[i] - height, 1.0};
    seq.poses.push_back(std::move(p));
    seq.frame_indices.push_back(static_cast<int64_t>(i));
  }
  return seq;
}

}  // namespace

TEST_CASE("compute_subject_stats: clustering fixture selects far_y = 110") {
  // close = 310, median = 200, threshold 0.7*(310-200) = 77; candidates are
  // ys with (200 - y) >= 77 -> {100, 110}; far = max = 110.
  const auto seq = sequence_with_ankle_ys({100, 110, 200, 300, 310});
  const SubjectStats s = compute_subject_stats(seq, 0.7);
  CHECK(s.close_y == doctest::Approx(310.0));
  CHECK(s.median_y == doctest::Approx(200.0));
  CHECK(s.far_y == doctest::Approx(110.0));
}

TEST_CASE("compute_subject_stats: empty cluster falls back to min") {
  // close = 300, median = 175, threshold 0.7*125 = 87.5; no y is 87.5 below
  // the median (max distance is 75), so far falls back to min = 100.
  const auto seq = sequence_with_ankle_ys({100, 150, 200, 300});
  const SubjectStats s = compute_subject_stats(seq, 0.7);
  CHECK(s.far_y == doctest::Approx(100.0));
}

TEST_CASE("compute_subject_stats: literal rule differs from the prose rule") {
  // Literal rule keeps ys *within* alpha of the close-median distance, i.e.
  // near the median; on the first fixture it picks 150 rather than 110.
  const auto seq = sequence_with_ankle_ys({110, 150, 200, 300, 310});
  const SubjectStats prose = compute_subject_stats(seq, 0.7, FarPositionRule::prose);
  const SubjectStats literal = compute_subject_stats(seq, 0.7, FarPositionRule::literal);
  CHECK(prose.far_y == doctest::Approx(110.0));
  CHECK(literal.far_y == doctest::Approx(150.0));
}

TEST_CASE("compute_subject_stats: degenerate and insufficient input") {
  CHECK_THROWS_AS(compute_subject_stats(sequence_with_ankle_ys({200, 200, 200})), Error);
  CHECK_THROWS_AS(compute_subject_stats(sequence_with_ankle_ys({200})), Error);

  // Frames with a missing ankle or nose are skipped entirely.
  auto seq = sequence_with_ankle_ys({100, 200, 300});
  seq.poses[1].joint(14).confidence = 0.0;
  const SubjectStats s = compute_subject_stats(seq, 0.7);
  CHECK(s.close_y == doctest::Approx(300.0));
}

TEST_CASE("compute_subject_stats: heights are medians within the 5% band") {
  // close = 300, median = 200, cluster threshold 0.7*100 = 70 -> far
  // candidates {100, 104}, far = 104. Band = 0.05*(300-104) = 9.8, so the
  // far band holds heights {40, 44} and the close band {56, 60}.
  PoseSequence seq;
  seq.fps = 30;
  const std::vector<std::pair<double, double>> frames = {
      {100, 40}, {104, 44}, {296, 56}, {300, 60}, {200, 50}};
  int64_t idx = 0;
  for (auto [y, h] : frames) {
    Pose p = Pose::empty(SkeletonTopology::body25());
    p.joint(11) = {100, y, 1.0};
    p.joint(14) = {100, y, 1.0};
    p.joint(0) = {100, y - h, 1.0};
    seq.poses.push_back(std::move(p));
    seq.frame_indices.push_back(idx++);
  }
  const SubjectStats s = compute_subject_stats(seq, 0.7);
  CHECK(s.far_y == doctest::Approx(104.0));
  CHECK(s.height_far == doctest::Approx(42.0));    // median of {40, 44}
  CHECK(s.height_close == doctest::Approx(58.0));  // median of {56, 60}
}

TEST_CASE("translation_for fixtures") {
  SubjectStats src, tgt;
  src.far_y = 100;
  src.close_y = 300;
  src.height_far = src.height_close = 1;
  tgt.far_y = 150;
  tgt.close_y = 350;
  tgt.height_far = tgt.height_close = 1;

  CHECK(translation_for(100, src, tgt) == doctest::Approx(150.0));  // s_far -> t_far
  CHECK(translation_for(300, src, tgt) == doctest::Approx(350.0));  // s_close -> t_close
  CHECK(translation_for(200, src, tgt) == doctest::Approx(250.0));  // 150 + (100/200)*200

  CHECK(translation_for(123.0, src, src) == doctest::Approx(123.0));  // identity mapping

  SubjectStats degenerate = src;
  degenerate.close_y = degenerate.far_y;
  CHECK_THROWS_AS(translation_for(100, degenerate, tgt), Error);
}

TEST_CASE("scale_for fixtures") {
  SubjectStats src, tgt;
  src.far_y = 100;
  src.close_y = 300;
  src.height_far = 10;
  src.height_close = 20;
  tgt = src;

  CHECK(scale_for(100, src, tgt) == doctest::Approx(1.0));  // c_far = 1 at y = s_far
  CHECK(scale_for(237, src, tgt) == doctest::Approx(1.0));  // identical stats: always 1

  // c_close = 0.5, c_far = 1.0, midway -> 0.75.
  tgt.height_close = 10;
  tgt.height_far = 10;
  CHECK(scale_for(200, src, tgt) == doctest::Approx(0.75));

  SubjectStats bad = src;
  bad.height_close = 0.0;
  CHECK_THROWS_AS(scale_for(200, bad, tgt), Error);
}

TEST_CASE("normalize_pose: identity stats give the identity map") {
  std::mt19937_64 rng(123);
  const SubjectStats s = testutil::random_valid_stats(rng);
  for (int i = 0; i < 50; ++i) {
    Pose p = testutil::full_body25_pose(rng);
    const Pose out = normalize_pose(p, s, s);
    for (int j = 0; j < p.joint_count(); ++j) {
      CHECK(std::abs(out.joint(j).y - p.joint(j).y) < 1e-6);
      CHECK(std::abs(out.joint(j).x - p.joint(j).x) < 1e-6);
    }
  }
}

TEST_CASE("normalize_pose: anchoring postcondition") {
  std::mt19937_64 rng(124);
  for (int i = 0; i < 200; ++i) {
    const SubjectStats src = testutil::random_valid_stats(rng);
    const SubjectStats tgt = testutil::random_valid_stats(rng);
    const Pose p = testutil::full_body25_pose(rng);
    const Pose out = normalize_pose(p, src, tgt);
    const double mapped = translation_for(avg_ankle_y(p), src, tgt);
    CHECK(std::abs(avg_ankle_y(out) - mapped) < 1e-6);
  }
}

TEST_CASE("normalize_pose: hand-applied translate-then-scale fixture") {
  // Stats engineered so that a pose at ankle y = 100 maps to y' = 200 with
  // scale 0.5: src spans [100, 300] with heights (10, 10); tgt far_y = 200
  // with height ratio c_far = 0.5 everywhere.
  SubjectStats src, tgt;
  src.far_y = 100;
  src.close_y = 300;
  src.height_far = src.height_close = 10;
  tgt.far_y = 200;
  tgt.close_y = 400;
  tgt.height_far = tgt.height_close = 5;

  const double anchor_x = 40.0;
  Pose p = Pose::empty(SkeletonTopology::body25());
  p.joint(0) = {anchor_x, -10 + 100, 1.0};       // nose 10 above the ankle line
  p.joint(11) = {anchor_x - 1, 100, 1.0};
  p.joint(14) = {anchor_x + 1, 100, 1.0};

  const Pose out = normalize_pose(p, src, tgt);
  CHECK(out.joint(0).x == doctest::Approx(anchor_x));
  CHECK(out.joint(0).y == doctest::Approx(195.0));  // 200 - 0.5*10
  CHECK(out.joint(11).x == doctest::Approx(anchor_x - 0.5));
  CHECK(out.joint(14).x == doctest::Approx(anchor_x + 0.5));
  CHECK(out.joint(11).y == doctest::Approx(200.0));
  CHECK(out.joint(14).y == doctest::Approx(200.0));
}

TEST_CASE("normalize_pose: missing joints stay missing, confidences unchanged") {
  std::mt19937_64 rng(125);
  const SubjectStats src = testutil::random_valid_stats(rng);
  const SubjectStats tgt = testutil::random_valid_stats(rng);
  Pose p = testutil::full_body25_pose(rng);
  p.joint(7).confidence = 0.0;
  p.joint(3).confidence = 0.63;
  const Pose out = normalize_pose(p, src, tgt);
  CHECK(out.joint(7).confidence == 0.0);
  CHECK(out.joint(7).x == p.joint(7).x);  // untouched
  CHECK(out.joint(3).confidence == 0.63);

  Pose no_ankles = p;
  no_ankles.joint(11).confidence = 0.0;
  CHECK_THROWS_AS(normalize_pose(no_ankles, src, tgt), Error);
}

TEST_CASE("normalization properties: endpoints, monotonicity, height ratio") {
  std::mt19937_64 rng(321);
  for (int i = 0; i < 1000; ++i) {
    const SubjectStats src = testutil::random_valid_stats(rng);
    const SubjectStats tgt = testutil::random_valid_stats(rng);
    CHECK(std::abs(translation_for(src.far_y, src, tgt) - tgt.far_y) < 1e-9);
    CHECK(std::abs(translation_for(src.close_y, src, tgt) - tgt.close_y) < 1e-9);

    // Affine and strictly increasing for positively oriented ranges.
    const double y0 = src.far_y + 1.0, y1 = src.far_y + 2.0;
    CHECK(translation_for(y1, src, tgt) > translation_for(y0, src, tgt));
  }

  // Uniform scaling: height ratio equals scale_for at the pose's ankle y.
  for (int i = 0; i < 200; ++i) {
    const SubjectStats src = testutil::random_valid_stats(rng);
    const SubjectStats tgt = testutil::random_valid_stats(rng);
    const Pose p = testutil::full_body25_pose(rng);
    const double s = scale_for(avg_ankle_y(p), src, tgt);
    const double h = subject_height(p);
    if (h < 1e-6) continue;
    const Pose out = normalize_pose(p, src, tgt);
    CHECK(subject_height(out) / h == doctest::Approx(std::abs(s)).epsilon(1e-6));
  }
}

TEST_CASE("stats file round trip") {
  testutil::TempDir dir("stats");
  SubjectStats s;
  s.subject_id = "dancer42";
  s.close_y = 311.25;
  s.far_y = 97.5;
  s.height_close = 141.0;
  s.height_far = 88.75;
  s.median_y = 205.625;
  s.alpha = 0.7;
  save_subject_stats(s, dir / "subject.stats");
  const SubjectStats back = load_subject_stats(dir / "subject.stats");
  CHECK(back.subject_id == s.subject_id);
  CHECK(back.close_y == s.close_y);
  CHECK(back.far_y == s.far_y);
  CHECK(back.height_close == s.height_close);
  CHECK(back.height_far == s.height_far);
  CHECK(back.median_y == s.median_y);
  CHECK(back.alpha == s.alpha);
}
