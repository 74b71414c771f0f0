// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <random>

#include "core/evaluation.hpp"
#include "core/render.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

Image checkerboard(int side, int cell, bool inverted) {
  Image img(side, side, 3);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const bool on = ((x / cell + y / cell) % 2 == 0) != inverted;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = on ? 1.0f : -1.0f;
    }
  return img;
}

Image random_image(int w, int h, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Image img(w, h, 3);
  for (auto& v : img.data) v = u(rng);
  return img;
}

}  // namespace

TEST_CASE("ssim: identity is exactly 1.0") {
  const Image img = random_image(48, 32, 1);
  CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim: symmetry") {
  const Image a = random_image(48, 32, 2);
  const Image b = random_image(48, 32, 3);
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
}

TEST_CASE("ssim: checkerboard vs inverse matches the external reference") {
  // Reference value computed with an independent implementation
  // (scikit-image 0.25, gaussian window, sigma 1.5, win 11, data range 1).
  const Image a = checkerboard(32, 4, false);
  const Image b = checkerboard(32, 4, true);
  const double v = ssim(a, b);
  CHECK(v < 0.0);
  CHECK(v == doctest::Approx(-0.9034116684).epsilon(1e-4));
}

TEST_CASE("ssim: agreement with the frozen external reference on LCG images") {
  // Pixel streams and expected values generated together; see the naive
  // in-test oracle below for an independent same-run route.
  const double expected[10] = {0.8781751017, 0.8861132492, 0.8857971080, 0.8853858280,
                               0.8838975266, 0.8845790908, 0.8922362140, 0.8745431741,
                               0.8847233294, 0.8916770510};
  for (int k = 0; k < 10; ++k) {
    testutil::Lcg lcg(static_cast<uint32_t>(1000 + k));
    std::vector<double> ua(48 * 32), ub(48 * 32);
    for (auto& v : ua) v = lcg.next_unit();
    for (auto& v : ub) v = lcg.next_unit();
    std::vector<double> blended(48 * 32);
    for (size_t i = 0; i < ub.size(); ++i) blended[i] = 0.7 * ua[i] + 0.3 * ub[i];
    const Image a = testutil::gray_image_from_units(ua, 48, 32);
    const Image b = testutil::gray_image_from_units(blended, 48, 32);
    CHECK(ssim(a, b) == doctest::Approx(expected[k]).epsilon(1e-4));
  }
}

TEST_CASE("ssim: agreement with a direct per-window implementation") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 6; ++trial) {
    const Image a = random_image(40, 24, 100 + trial);
    Image b = a;
    std::normal_distribution<float> noise(0.0f, 0.2f);
    for (auto& v : b.data) v = std::clamp(v + noise(rng), -1.0f, 1.0f);
    CHECK(ssim(a, b) == doctest::Approx(testutil::naive_ssim(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("ssim: bounds and error cases") {
  const Image a = random_image(32, 32, 5);
  const Image b = random_image(32, 32, 6);
  const double v = ssim(a, b);
  CHECK(v >= -1.0);
  CHECK(v <= 1.0);
  CHECK_THROWS_AS(ssim(a, random_image(16, 16, 7)), Error);
  CHECK_THROWS_AS(ssim(random_image(8, 8, 8), random_image(8, 8, 9)), Error);  // window
}

TEST_CASE("region_metrics: identity, locality, and face-box consistency") {
  std::mt19937_64 rng(11);
  Pose pose = testutil::full_body25_pose(rng, 128, 64);
  pose.joint(0) = {64, 20, 1.0};  // nose safely inside

  const Image gt = random_image(128, 64, 20);
  const RegionMetrics same = region_metrics(gt, gt, pose, 32);
  REQUIRE(same.face.has_value());
  CHECK(same.face->ssim == 1.0);
  CHECK(same.body.ssim == 1.0);

  // Corrupt exactly the face region: the body box also contains the face
  // here, so check the reverse direction too (corruption outside the face
  // box leaves the face score at 1).
  const FaceBox fbox = face_box(pose, 32, 128, 64);
  Image corrupted_face = gt;
  for (int y = fbox.y0; y < fbox.y1; ++y)
    for (int x = fbox.x0; x < fbox.x1; ++x) corrupted_face.at(0, y, x) = -1.0f;
  const RegionMetrics rm = region_metrics(corrupted_face, gt, pose, 32);
  CHECK(rm.face->ssim < 1.0);

  Image corrupted_corner = gt;
  for (int y = 0; y < 8; ++y)
    for (int x = 120; x < 128; ++x) corrupted_corner.at(1, y, x) = 1.0f;
  // Pixels inside neither region: rebuild a pose whose keypoints avoid the
  // corner so the body box misses it.
  Pose compact = pose;
  for (auto& kp : compact.keypoints) {
    kp.x = std::clamp(kp.x, 20.0, 80.0);
    kp.y = std::clamp(kp.y, 25.0, 60.0);
  }
  compact.joint(0) = {50, 30, 1.0};
  const RegionMetrics rm2 = region_metrics(corrupted_corner, gt, compact, 32);
  CHECK(rm2.face->ssim == 1.0);
  CHECK(rm2.body.ssim == 1.0);

  // The face crop is the same geometry as the face GAN crop.
  const MetricSet direct{ssim(crop_region(corrupted_face, fbox), crop_region(gt, fbox)),
                         std::nullopt};
  CHECK(rm.face->ssim == direct.ssim);
}

TEST_CASE("region_metrics: missing nose drops the face entry, body remains") {
  std::mt19937_64 rng(12);
  Pose pose = testutil::full_body25_pose(rng, 128, 64);
  pose.joint(0).confidence = 0.0;
  const Image gt = random_image(128, 64, 21);
  const RegionMetrics rm = region_metrics(gt, gt, pose, 32);
  CHECK(!rm.face.has_value());
  CHECK(rm.body.ssim == 1.0);
}

TEST_CASE("lpips plugin: optional columns appear when registered") {
  std::mt19937_64 rng(13);
  Pose pose = testutil::full_body25_pose(rng, 128, 64);
  pose.joint(0) = {64, 32, 1.0};
  const Image gt = random_image(128, 64, 22);

  CHECK(!has_lpips_plugin());
  CHECK(!region_metrics(gt, gt, pose, 32).body.lpips.has_value());

  register_lpips_plugin([](const Image& a, const Image& b) {
    double acc = 0;
    for (size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
    return acc / static_cast<double>(a.data.size());
  });
  const RegionMetrics rm = region_metrics(gt, gt, pose, 32);
  REQUIRE(rm.body.lpips.has_value());
  CHECK(*rm.body.lpips == 0.0);
  clear_lpips_plugin();
  CHECK(!has_lpips_plugin());
}

TEST_CASE("evaluate_sequence: hand-averaged aggregate") {
  std::mt19937_64 rng(14);
  Pose pose = testutil::full_body25_pose(rng, 64, 64);
  pose.joint(0) = {32, 20, 1.0};
  std::vector<Pose> poses(3, pose);
  std::vector<Image> gts = {random_image(64, 64, 30), random_image(64, 64, 31),
                            random_image(64, 64, 32)};
  std::vector<Image> preds = gts;
  // Corrupt frame 2 wholesale.
  for (auto& v : preds[2].data) v = -v;

  const SequenceReport report = evaluate_sequence(preds, gts, poses, 16);
  REQUIRE(report.rows.size() == 3);
  double manual = 0;
  for (int i = 0; i < 3; ++i) manual += ssim(preds[static_cast<size_t>(i)],
                                             gts[static_cast<size_t>(i)]);
  (void)manual;
  double body_manual = 0;
  for (const auto& row : report.rows) body_manual += row.body.ssim;
  CHECK(report.body_ssim_mean == doctest::Approx(body_manual / 3.0).epsilon(1e-12));
  CHECK(report.rows[0].body.ssim == 1.0);
  CHECK(report.rows[2].body.ssim < 1.0);

  CHECK_THROWS_AS(evaluate_sequence({}, {}, {}, 16), Error);
  CHECK_THROWS_AS(evaluate_sequence(preds, gts, {pose}, 16), Error);
}

TEST_CASE("report file has one row per frame plus an aggregate footer") {
  std::mt19937_64 rng(15);
  Pose pose = testutil::full_body25_pose(rng, 64, 64);
  pose.joint(0) = {32, 20, 1.0};
  const Image gt = random_image(64, 64, 33);
  const SequenceReport report = evaluate_sequence({gt, gt}, {gt, gt}, {pose, pose}, 16);

  testutil::TempDir dir("report");
  save_report(report, dir / "eval.tsv");
  std::ifstream in(dir / "eval.tsv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);  // header, column row, 2 frames, aggregate
  CHECK(lines[0] == "retarget-eval 1");
  CHECK(lines.back().rfind("aggregate", 0) == 0);
  CHECK(lines.back().find("1.000000") != std::string::npos);
}
