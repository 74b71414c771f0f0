// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/render.hpp"
#include "support/testutil.hpp"

using namespace retarget;

namespace {

bool images_equal(const Image& a, const Image& b) {
  return a.same_size(b) && a.data == b.data;
}

bool pixel_black(const Image& img, int x, int y) {
  for (int c = 0; c < 3; ++c)
    if (img.at(c, y, x) != -1.0f) return false;
  return true;
}

}  // namespace

TEST_CASE("render: all joints missing gives an all-black canvas") {
  Pose p = Pose::empty(SkeletonTopology::body25());
  const Image img = render_stick_figure(p, 64, 32);
  for (float v : img.data) CHECK(v == -1.0f);
}

TEST_CASE("render: determinism (bit-identical repeat)") {
  std::mt19937_64 rng(5);
  const Pose p = testutil::full_body25_pose(rng, 128, 64);
  const Image a = render_stick_figure(p, 128, 64);
  const Image b = render_stick_figure(p, 128, 64);
  CHECK(images_equal(a, b));
}

TEST_CASE("render: two-joint horizontal segment matches a scanline oracle") {
  auto topo = testutil::two_joint_topology();
  Pose p = Pose::empty(topo);
  p.joint(0) = {10, 10, 1};
  p.joint(1) = {20, 10, 1};
  RenderStyle style;
  style.base_thickness = 1;
  style.base_canvas_width = 64;  // thickness stays 1 on a 64-wide canvas
  const Image img = render_stick_figure(p, 64, 32, style);

  // Oracle: independent scanline rasterization. Thickness-1 line has radius
  // 0.5, joint discs radius 1; a pixel is lit iff its center is within that
  // distance of the segment/joint.
  auto expected_lit = [&](int x, int y) {
    auto dist2_seg = [&](double px, double py, double ax, double ay, double bx, double by) {
      const double abx = bx - ax, aby = by - ay;
      const double len2 = abx * abx + aby * aby;
      double t = len2 > 0 ? ((px - ax) * abx + (py - ay) * aby) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double dx = px - (ax + t * abx), dy = py - (ay + t * aby);
      return dx * dx + dy * dy;
    };
    if (dist2_seg(x, y, 10, 10, 20, 10) <= 0.25) return true;          // line, radius 0.5
    if ((x - 10) * (x - 10) + (y - 10) * (y - 10) <= 1.0) return true;  // disc at a
    if ((x - 20) * (x - 20) + (y - 10) * (y - 10) <= 1.0) return true;  // disc at b
    return false;
  };
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      CHECK(pixel_black(img, x, y) == !expected_lit(x, y));
}

TEST_CASE("render: missing endpoint skips the limb but keeps the joint disc") {
  auto topo = testutil::two_joint_topology();
  Pose p = Pose::empty(topo);
  p.joint(0) = {10, 16, 1};
  p.joint(1) = {50, 16, 0.0};  // missing
  const Image img = render_stick_figure(p, 64, 32);
  CHECK(!pixel_black(img, 10, 16));  // disc at joint 0
  CHECK(pixel_black(img, 30, 16));   // midpoint of the skipped limb
  CHECK(pixel_black(img, 50, 16));   // no disc at the missing joint
}

TEST_CASE("render: off-canvas coordinates are clipped") {
  auto topo = testutil::two_joint_topology();
  Pose p = Pose::empty(topo);
  p.joint(0) = {-100, -50, 1};
  p.joint(1) = {200, 90, 1};
  const Image img = render_stick_figure(p, 64, 32);  // must not crash
  CHECK(img.width == 64);
}

TEST_CASE("render: thickness scales with canvas width") {
  RenderStyle style;
  CHECK(style.thickness_for(512) == 4);
  CHECK(style.thickness_for(1024) == 8);
  CHECK(style.thickness_for(128) == 1);
  CHECK(style.thickness_for(16) == 1);  // never below 1
}

TEST_CASE("face_box fixtures") {
  Pose p = Pose::empty(SkeletonTopology::body25());
  p.joint(0) = {500, 100, 1};
  const FaceBox box = face_box(p, 128, 1024, 512);
  CHECK(box.x0 == 436);
  CHECK(box.y0 == 36);
  CHECK(box.x1 == 564);
  CHECK(box.y1 == 164);

  p.joint(0) = {10, 10, 1};
  const FaceBox clamped = face_box(p, 128, 1024, 512);
  CHECK(clamped.x0 == 0);
  CHECK(clamped.y0 == 0);
  CHECK(clamped.x1 == 128);
  CHECK(clamped.y1 == 128);

  CHECK_THROWS_AS(face_box(p, 600, 1024, 512), Error);  // taller than the canvas
  p.joint(0).confidence = 0.0;
  CHECK_THROWS_AS(face_box(p, 128, 1024, 512), Error);
}

TEST_CASE("face_box always fits and keeps its exact size") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(-50, 1074), uy(-50, 562);
  for (int i = 0; i < 500; ++i) {
    Pose p = Pose::empty(SkeletonTopology::body25());
    p.joint(0) = {ux(rng), uy(rng), 1.0};
    const FaceBox box = face_box(p, 128, 1024, 512);
    CHECK(box.inside(1024, 512));
    CHECK(box.width() == 128);
    CHECK(box.height() == 128);
  }
}

TEST_CASE("crop and paste are inverse; full-image crop is the identity") {
  std::mt19937_64 rng(3);
  Image img(64, 32, 3);
  for (auto& v : img.data) v = std::uniform_real_distribution<float>(-1, 1)(rng);
  const FaceBox box{8, 4, 24, 20};
  const Image patch = crop_region(img, box);
  Image copy = img;
  paste_region(copy, patch, box);
  CHECK(images_equal(copy, img));

  const FaceBox full{0, 0, 64, 32};
  CHECK(images_equal(crop_region(img, full), img));

  Image gray(64, 32, 3, 0.25f);
  const Image gpatch = crop_region(gray, box);
  for (float v : gpatch.data) CHECK(v == 0.25f);

  CHECK_THROWS_AS(crop_region(img, FaceBox{50, 4, 66, 20}), Error);
}

TEST_CASE("composite_residual: zero residual is the identity") {
  std::mt19937_64 rng(4);
  Image frame(64, 32, 3);
  for (auto& v : frame.data) v = std::uniform_real_distribution<float>(-1, 1)(rng);
  const FaceBox box{10, 6, 26, 22};
  const Image zeros(16, 16, 3, 0.0f);
  CHECK(images_equal(composite_residual(frame, zeros, box), frame));
}

TEST_CASE("composite_residual: locality and clipping") {
  std::mt19937_64 rng(6);
  Image frame(64, 32, 3);
  for (auto& v : frame.data) v = std::uniform_real_distribution<float>(-1, 1)(rng);
  const FaceBox box{10, 6, 26, 22};
  Image residual(16, 16, 3);
  for (auto& v : residual.data) v = std::uniform_real_distribution<float>(-1, 1)(rng);
  const Image out = composite_residual(frame, residual, box);

  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 64; ++x) {
        const bool inside = x >= box.x0 && x < box.x1 && y >= box.y0 && y < box.y1;
        if (!inside) CHECK(out.at(c, y, x) == frame.at(c, y, x));
        else {
          CHECK(out.at(c, y, x) >= -1.0f);
          CHECK(out.at(c, y, x) <= 1.0f);
        }
      }

  // 0.9 + 0.3 clips to 1.0.
  Image f2(16, 16, 3, 0.9f);
  Image r2(16, 16, 3, 0.3f);
  const Image clipped = composite_residual(f2, r2, FaceBox{0, 0, 16, 16});
  for (float v : clipped.data) CHECK(v == 1.0f);

  CHECK_THROWS_AS(composite_residual(frame, Image(8, 8, 3), box), Error);
}
