// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/image.hpp"
#include "core/pose.hpp"

namespace retarget {

// Half-open pixel box with width == height == the configured face size.
struct FaceBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool inside(int canvas_w, int canvas_h) const {
    return x0 >= 0 && y0 >= 0 && x1 <= canvas_w && y1 <= canvas_h && x0 < x1 && y0 < y1;
  }
};

struct RenderStyle {
  // Line thickness at a 512-wide canvas; scaled proportionally with width.
  int base_thickness = 4;
  int base_canvas_width = 512;

  int thickness_for(int canvas_width) const {
    const int t = static_cast<int>(std::lround(
        static_cast<double>(base_thickness) * canvas_width / base_canvas_width));
    return t < 1 ? 1 : t;
  }
};

// Rasterizes the colored stick figure on a black canvas. Limbs with a missing
// endpoint are skipped; present joints get a filled disc (radius = thickness).
// Coordinates outside the canvas are clipped.
Image render_stick_figure(const Pose& pose, int canvas_width, int canvas_height,
                          const RenderStyle& style = {});

// Low-level rasterizers (exact distance-to-segment test, clipped to the
// canvas). A zero-length capsule is a disc.
void draw_capsule(Image& image, double ax, double ay, double bx, double by, double radius,
                  const std::array<uint8_t, 3>& color);

// Box of side face_size centered on the nose, translated (never shrunk) to
// fit inside the canvas.
FaceBox face_box(const Pose& pose, int face_size, int canvas_width, int canvas_height);

Image crop_region(const Image& image, const FaceBox& box);

// Writes patch over image at box (exact copy, no blending).
void paste_region(Image& image, const Image& patch, const FaceBox& box);

// frame + residual inside the box, clipped to [-1, 1]; bit-identical to frame
// outside the box.
Image composite_residual(const Image& frame, const Image& residual, const FaceBox& box);

}  // namespace retarget
