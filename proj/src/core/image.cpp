// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace retarget {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image from_rgb8(const std::vector<uint8_t>& rgb, int width, int height) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = byte_to_float(rgb[(static_cast<size_t>(y) * width + x) * 3 + c]);
  return img;
}

std::vector<uint8_t> to_rgb8(const Image& img) {
  std::vector<uint8_t> rgb(static_cast<size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[(static_cast<size_t>(y) * img.width + x) * 3 + c] =
            float_to_byte(img.at(std::min(c, img.channels - 1), y, x));
  return rgb;
}

Image load_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorCode::io_error, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::io_error, "libpng init failed");
  }
  std::vector<uint8_t> rgb;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::io_error, "failed to decode " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  // Normalize every input to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  rgb.resize(static_cast<size_t>(width) * height * 3);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = rgb.data() + static_cast<size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_rgb8(rgb, static_cast<int>(width), static_cast<int>(height));
}

void save_png(const Image& img, const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorCode::io_error, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::io_error, "libpng init failed");
  }
  std::vector<uint8_t> rgb = to_rgb8(img);
  std::vector<png_bytep> rows(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<size_t>(y)] = rgb.data() + static_cast<size_t>(y) * img.width * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::io_error, "failed to encode " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P6" || width <= 0 || height <= 0 || maxval != 255)
    fail(ErrorCode::io_error, "unsupported PPM file " + path);
  in.get();  // single whitespace after header
  std::vector<uint8_t> rgb(static_cast<size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!in) fail(ErrorCode::io_error, "truncated PPM file " + path);
  return from_rgb8(rgb, width, height);
}

void save_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> rgb = to_rgb8(img);
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) fail(ErrorCode::io_error, "failed writing " + path);
}

}  // namespace

Image load_image(const std::string& path) {
  if (has_suffix(path, ".png")) return load_png(path);
  if (has_suffix(path, ".ppm")) return load_ppm(path);
  fail(ErrorCode::io_error, "unsupported image extension: " + path);
}

void save_image(const Image& image, const std::string& path) {
  if (has_suffix(path, ".png")) return save_png(image, path);
  if (has_suffix(path, ".ppm")) return save_ppm(image, path);
  fail(ErrorCode::io_error, "unsupported image extension: " + path);
}

Image downsample_half(const Image& image) {
  if (image.width % 2 != 0 || image.height % 2 != 0)
    fail(ErrorCode::size_mismatch, "downsample_half needs even dimensions");
  Image out(image.width / 2, image.height / 2, image.channels);
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = 0.25f * (image.at(c, 2 * y, 2 * x) + image.at(c, 2 * y, 2 * x + 1) +
                                   image.at(c, 2 * y + 1, 2 * x) + image.at(c, 2 * y + 1, 2 * x + 1));
  return out;
}

std::vector<double> to_gray01(const Image& image) {
  std::vector<double> gray(static_cast<size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double r = (image.at(0, y, x) + 1.0) * 0.5;
      const double g = (image.at(std::min(1, image.channels - 1), y, x) + 1.0) * 0.5;
      const double b = (image.at(std::min(2, image.channels - 1), y, x) + 1.0) * 0.5;
      gray[static_cast<size_t>(y) * image.width + x] = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  return gray;
}

}  // namespace retarget
