// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace retarget {

// RGB frame in planar CHW float layout. Pixel values live in [-1, 1]
// internally; import/export converts to 8-bit.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> data;  // channels * height * width

  Image() = default;
  Image(int w, int h, int c = 3, float fill = -1.0f)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  bool same_size(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  int64_t pixel_count() const { return static_cast<int64_t>(width) * height; }
};

inline uint8_t float_to_byte(float v) {
  const float scaled = (v + 1.0f) * 0.5f * 255.0f;
  const long r = std::lround(scaled);
  return static_cast<uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

inline float byte_to_float(uint8_t b) {
  return static_cast<float>(b) / 255.0f * 2.0f - 1.0f;
}

// Lossless 8-bit RGB files. Format is chosen by extension: .png or .ppm.
Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

// 2x2 box downsample; both dimensions must be even.
Image downsample_half(const Image& image);

// Rec.601 luma in [0,1], row-major height*width.
std::vector<double> to_gray01(const Image& image);

}  // namespace retarget
