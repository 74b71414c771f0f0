// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/render.hpp"

#include <algorithm>
#include <cmath>

namespace retarget {

namespace {

void put_pixel(Image& img, int x, int y, const std::array<uint8_t, 3>& color) {
  if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
  for (int c = 0; c < 3; ++c) img.at(c, y, x) = byte_to_float(color[static_cast<size_t>(c)]);
}

// Squared distance from point p to segment ab.
double dist2_to_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double abx = bx - ax, aby = by - ay;
  const double apx = px - ax, apy = py - ay;
  const double len2 = abx * abx + aby * aby;
  double t = len2 > 0.0 ? (apx * abx + apy * aby) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * abx), dy = py - (ay + t * aby);
  return dx * dx + dy * dy;
}

void draw_disc(Image& img, double cx, double cy, double radius,
               const std::array<uint8_t, 3>& color) {
  draw_capsule(img, cx, cy, cx, cy, radius, color);
}

}  // namespace

void draw_capsule(Image& img, double ax, double ay, double bx, double by, double radius,
                  const std::array<uint8_t, 3>& color) {
  const int x0 = static_cast<int>(std::floor(std::min(ax, bx) - radius));
  const int x1 = static_cast<int>(std::ceil(std::max(ax, bx) + radius));
  const int y0 = static_cast<int>(std::floor(std::min(ay, by) - radius));
  const int y1 = static_cast<int>(std::ceil(std::max(ay, by) + radius));
  const double r2 = radius * radius;
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x)
      if (dist2_to_segment(x, y, ax, ay, bx, by) <= r2) put_pixel(img, x, y, color);
}

Image render_stick_figure(const Pose& pose, int canvas_width, int canvas_height,
                          const RenderStyle& style) {
  if (canvas_width <= 0 || canvas_height <= 0)
    fail(ErrorCode::invalid_config, "canvas dimensions must be positive");
  Image img(canvas_width, canvas_height, 3, -1.0f);  // exact black background
  const auto& topo = *pose.topology;
  const int thickness = style.thickness_for(canvas_width);
  const double line_radius = thickness / 2.0;
  const double disc_radius = thickness;  // joint disc radius = thickness

  for (size_t i = 0; i < topo.limbs.size(); ++i) {
    const auto [a, b] = topo.limbs[i];
    if (!pose.present(a) || !pose.present(b)) continue;
    draw_capsule(img, pose.joint(a).x, pose.joint(a).y, pose.joint(b).x, pose.joint(b).y,
                 line_radius, topo.limb_colors[i]);
  }

  // Joint discs on top, colored like the first limb touching the joint.
  for (int j = 0; j < pose.joint_count(); ++j) {
    if (!pose.present(j)) continue;
    std::array<uint8_t, 3> color = {255, 255, 255};
    for (size_t i = 0; i < topo.limbs.size(); ++i)
      if (topo.limbs[i].first == j || topo.limbs[i].second == j) {
        color = topo.limb_colors[i];
        break;
      }
    draw_disc(img, pose.joint(j).x, pose.joint(j).y, disc_radius, color);
  }
  return img;
}

FaceBox face_box(const Pose& pose, int face_size, int canvas_width, int canvas_height) {
  if (face_size <= 0 || face_size > canvas_width || face_size > canvas_height)
    fail(ErrorCode::invalid_config, "face_size " + std::to_string(face_size) +
                                        " does not fit canvas " + std::to_string(canvas_width) +
                                        "x" + std::to_string(canvas_height));
  const auto& topo = *pose.topology;
  if (!pose.present(topo.nose)) fail(ErrorCode::missing_joint, "nose missing");
  const int cx = static_cast<int>(std::lround(pose.joint(topo.nose).x));
  const int cy = static_cast<int>(std::lround(pose.joint(topo.nose).y));
  int x0 = cx - face_size / 2;
  int y0 = cy - face_size / 2;
  x0 = std::clamp(x0, 0, canvas_width - face_size);
  y0 = std::clamp(y0, 0, canvas_height - face_size);
  return {x0, y0, x0 + face_size, y0 + face_size};
}

Image crop_region(const Image& image, const FaceBox& box) {
  if (!box.inside(image.width, image.height))
    fail(ErrorCode::out_of_bounds, "crop box outside image");
  Image out(box.width(), box.height(), image.channels);
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = image.at(c, box.y0 + y, box.x0 + x);
  return out;
}

void paste_region(Image& image, const Image& patch, const FaceBox& box) {
  if (!box.inside(image.width, image.height))
    fail(ErrorCode::out_of_bounds, "paste box outside image");
  if (patch.width != box.width() || patch.height != box.height() ||
      patch.channels != image.channels)
    fail(ErrorCode::size_mismatch, "patch size does not match box");
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < patch.height; ++y)
      for (int x = 0; x < patch.width; ++x)
        image.at(c, box.y0 + y, box.x0 + x) = patch.at(c, y, x);
}

Image composite_residual(const Image& frame, const Image& residual, const FaceBox& box) {
  if (!box.inside(frame.width, frame.height))
    fail(ErrorCode::out_of_bounds, "composite box outside frame");
  if (residual.width != box.width() || residual.height != box.height() ||
      residual.channels != frame.channels)
    fail(ErrorCode::size_mismatch, "residual size does not match box");
  Image out = frame;
  for (int c = 0; c < frame.channels; ++c)
    for (int y = 0; y < residual.height; ++y)
      for (int x = 0; x < residual.width; ++x) {
        const float v = frame.at(c, box.y0 + y, box.x0 + x) + residual.at(c, y, x);
        out.at(c, box.y0 + y, box.x0 + x) = std::clamp(v, -1.0f, 1.0f);
      }
  return out;
}

}  // namespace retarget
