// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "core/image.hpp"
#include "core/normalization.hpp"
#include "core/pose.hpp"

namespace retarget::testutil {

// Minimal custom topologies for geometry-level tests.
inline std::shared_ptr<const SkeletonTopology> two_joint_topology() {
  auto t = std::make_shared<SkeletonTopology>();
  t->name = "two-joint";
  t->joint_names = {"a", "b"};
  t->limbs = {{0, 1}};
  t->limb_colors = {{255, 0, 0}};
  t->nose = 0;
  t->left_ankle = 1;
  t->right_ankle = 1;
  t->validate();
  return t;
}

inline Pose full_body25_pose(std::mt19937_64& rng, double width = 512, double height = 256) {
  std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height);
  Pose p = Pose::empty(SkeletonTopology::body25());
  for (auto& kp : p.keypoints) kp = {ux(rng), uy(rng), 1.0};
  return p;
}

inline SubjectStats random_valid_stats(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SubjectStats s;
  s.far_y = 50.0 + 300.0 * u(rng);
  s.close_y = s.far_y + 10.0 + 400.0 * u(rng);
  s.median_y = 0.5 * (s.far_y + s.close_y);
  s.height_far = 20.0 + 200.0 * u(rng);
  s.height_close = 20.0 + 200.0 * u(rng);
  s.alpha = 0.7;
  return s;
}

// Self-cleaning scratch directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("retarget_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Independent SSIM reference: direct per-window double-precision evaluation
// (no separable filtering), same constants and Gaussian weights as the
// library is specified to use. Deliberately written as a different route.
inline double naive_ssim(const Image& a, const Image& b) {
  const int w = a.width, h = a.height, rad = 5;
  const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::vector<double> ga = to_gray01(a), gb = to_gray01(b);
  double weights[11][11];
  double wsum = 0.0;
  for (int dy = -rad; dy <= rad; ++dy)
    for (int dx = -rad; dx <= rad; ++dx) {
      weights[dy + rad][dx + rad] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      wsum += weights[dy + rad][dx + rad];
    }
  for (auto& row : weights)
    for (double& v : row) v /= wsum;

  double total = 0.0;
  int count = 0;
  for (int y = rad; y < h - rad; ++y)
    for (int x = rad; x < w - rad; ++x) {
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      for (int dy = -rad; dy <= rad; ++dy)
        for (int dx = -rad; dx <= rad; ++dx) {
          const double wgt = weights[dy + rad][dx + rad];
          const double va = ga[static_cast<size_t>(y + dy) * w + (x + dx)];
          const double vb = gb[static_cast<size_t>(y + dy) * w + (x + dx)];
          mx += wgt * va;
          my += wgt * vb;
          mxx += wgt * va * va;
          myy += wgt * vb * vb;
          mxy += wgt * va * vb;
        }
      const double vx = mxx - mx * mx, vy = myy - my * my, vxy = mxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * vxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

// Matches the generator script for the frozen external reference values.
class Lcg {
 public:
  explicit Lcg(uint32_t seed) : state_(seed & 0x7fffffffu) {}
  double next_unit() {
    state_ = static_cast<uint32_t>((1103515245ull * state_ + 12345ull) % (1u << 31));
    return static_cast<double>(state_) / static_cast<double>(1u << 31);
  }

 private:
  uint32_t state_;
};

inline Image gray_image_from_units(const std::vector<double>& units, int width, int height) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const float f = static_cast<float>(units[static_cast<size_t>(y) * width + x] * 2.0 - 1.0);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = f;
    }
  return img;
}

}  // namespace retarget::testutil
