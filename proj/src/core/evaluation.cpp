// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/render.hpp"

namespace retarget {

namespace {

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kRadius;
    k[static_cast<size_t>(i)] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter. Border values use zero padding, which is fine
// because callers only read the region where the window fits entirely.
std::vector<double> gauss_filter(const std::vector<double>& img, int w, int h) {
  static const std::vector<double> kernel = gaussian_kernel();
  std::vector<double> tmp(img.size(), 0.0), out(img.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -kRadius; t <= kRadius; ++t) {
        const int xx = x + t;
        if (xx >= 0 && xx < w)
          acc += kernel[static_cast<size_t>(t + kRadius)] * img[static_cast<size_t>(y) * w + xx];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -kRadius; t <= kRadius; ++t) {
        const int yy = y + t;
        if (yy >= 0 && yy < h)
          acc += kernel[static_cast<size_t>(t + kRadius)] * tmp[static_cast<size_t>(yy) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  return out;
}

LpipsFn g_lpips;

MetricSet metrics_for(const Image& pred, const Image& gt) {
  MetricSet m;
  m.ssim = ssim(pred, gt);
  if (g_lpips) m.lpips = g_lpips(pred, gt);
  return m;
}

// Body region: bounding box of present keypoints, padded by 10% of its size
// per side, clamped to the frame, and widened to fit the SSIM window.
FaceBox body_box(const Pose& pose, int width, int height) {
  double x0 = 1e30, y0 = 1e30, x1 = -1e30, y1 = -1e30;
  bool any = false;
  for (int j = 0; j < pose.joint_count(); ++j) {
    if (!pose.present(j)) continue;
    any = true;
    x0 = std::min(x0, pose.joint(j).x);
    y0 = std::min(y0, pose.joint(j).y);
    x1 = std::max(x1, pose.joint(j).x);
    y1 = std::max(y1, pose.joint(j).y);
  }
  if (!any) return {0, 0, width, height};  // no keypoints: score the full frame
  const double pad_x = 0.1 * (x1 - x0);
  const double pad_y = 0.1 * (y1 - y0);
  FaceBox box;
  box.x0 = std::clamp(static_cast<int>(std::floor(x0 - pad_x)), 0, width - 1);
  box.y0 = std::clamp(static_cast<int>(std::floor(y0 - pad_y)), 0, height - 1);
  box.x1 = std::clamp(static_cast<int>(std::ceil(x1 + pad_x)) + 1, box.x0 + 1, width);
  box.y1 = std::clamp(static_cast<int>(std::ceil(y1 + pad_y)) + 1, box.y0 + 1, height);

  auto widen = [](int lo, int hi, int limit, int target) {
    while (hi - lo < target && (lo > 0 || hi < limit)) {
      if (lo > 0) --lo;
      if (hi - lo < target && hi < limit) ++hi;
    }
    return std::pair<int, int>(lo, hi);
  };
  const int min_side = std::min({kWindow, width, height});
  std::tie(box.x0, box.x1) = widen(box.x0, box.x1, width, min_side);
  std::tie(box.y0, box.y1) = widen(box.y0, box.y1, height, min_side);
  return box;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_size(b))
    fail(ErrorCode::size_mismatch, "ssim: image sizes differ");
  if (a.width < kWindow || a.height < kWindow)
    fail(ErrorCode::size_mismatch, "ssim: image smaller than the 11x11 window");

  const int w = a.width, h = a.height;
  const std::vector<double> x = to_gray01(a);
  const std::vector<double> y = to_gray01(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const std::vector<double> ux = gauss_filter(x, w, h);
  const std::vector<double> uy = gauss_filter(y, w, h);
  const std::vector<double> uxx = gauss_filter(xx, w, h);
  const std::vector<double> uyy = gauss_filter(yy, w, h);
  const std::vector<double> uxy = gauss_filter(xy, w, h);

  const double c1 = (kK1 * 1.0) * (kK1 * 1.0);
  const double c2 = (kK2 * 1.0) * (kK2 * 1.0);
  double sum = 0.0;
  int64_t count = 0;
  for (int yi = kRadius; yi < h - kRadius; ++yi)
    for (int xi = kRadius; xi < w - kRadius; ++xi) {
      const size_t i = static_cast<size_t>(yi) * w + xi;
      const double vx = uxx[i] - ux[i] * ux[i];
      const double vy = uyy[i] - uy[i] * uy[i];
      const double vxy = uxy[i] - ux[i] * uy[i];
      const double s = ((2.0 * ux[i] * uy[i] + c1) * (2.0 * vxy + c2)) /
                       ((ux[i] * ux[i] + uy[i] * uy[i] + c1) * (vx + vy + c2));
      sum += s;
      ++count;
    }
  return sum / static_cast<double>(count);
}

void register_lpips_plugin(LpipsFn fn) { g_lpips = std::move(fn); }
void clear_lpips_plugin() { g_lpips = nullptr; }
bool has_lpips_plugin() { return static_cast<bool>(g_lpips); }

RegionMetrics region_metrics(const Image& pred, const Image& gt, const Pose& pose,
                             int face_size) {
  if (!pred.same_size(gt)) fail(ErrorCode::size_mismatch, "region_metrics: image sizes differ");
  RegionMetrics out;
  if (pose.present(pose.topology->nose)) {
    const FaceBox box = face_box(pose, face_size, pred.width, pred.height);
    out.face = metrics_for(crop_region(pred, box), crop_region(gt, box));
  }
  const FaceBox body = body_box(pose, pred.width, pred.height);
  out.body = metrics_for(crop_region(pred, body), crop_region(gt, body));
  return out;
}

SequenceReport evaluate_sequence(const std::vector<Image>& pred_frames,
                                 const std::vector<Image>& gt_frames,
                                 const std::vector<Pose>& poses, int face_size) {
  if (pred_frames.empty()) fail(ErrorCode::empty_dataset, "evaluate_sequence: no frames");
  if (pred_frames.size() != gt_frames.size() || pred_frames.size() != poses.size())
    fail(ErrorCode::length_mismatch, "evaluate_sequence: sequence lengths differ");

  SequenceReport report;
  double face_ssim_sum = 0, body_ssim_sum = 0, face_lpips_sum = 0, body_lpips_sum = 0;
  int face_n = 0, face_lpips_n = 0, body_lpips_n = 0;
  for (size_t i = 0; i < pred_frames.size(); ++i) {
    RegionMetrics m = region_metrics(pred_frames[i], gt_frames[i], poses[i], face_size);
    FrameMetricsRow row;
    row.frame_index = static_cast<int64_t>(i);
    row.face = m.face;
    row.body = m.body;
    report.rows.push_back(row);
    body_ssim_sum += m.body.ssim;
    if (m.body.lpips) {
      body_lpips_sum += *m.body.lpips;
      ++body_lpips_n;
    }
    if (m.face) {
      face_ssim_sum += m.face->ssim;
      ++face_n;
      if (m.face->lpips) {
        face_lpips_sum += *m.face->lpips;
        ++face_lpips_n;
      }
    }
  }
  report.body_ssim_mean = body_ssim_sum / static_cast<double>(pred_frames.size());
  if (face_n > 0) report.face_ssim_mean = face_ssim_sum / face_n;
  if (face_lpips_n > 0) report.face_lpips_mean = face_lpips_sum / face_lpips_n;
  if (body_lpips_n > 0) report.body_lpips_mean = body_lpips_sum / body_lpips_n;
  return report;
}

void save_report(const SequenceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "retarget-eval 1\n";
  out << "frame\tface_ssim\tbody_ssim\tface_lpips\tbody_lpips\n";
  for (const auto& row : report.rows) {
    out << row.frame_index << "\t"
        << cell(row.face ? std::optional<double>(row.face->ssim) : std::nullopt) << "\t"
        << cell(row.body.ssim) << "\t"
        << cell(row.face ? row.face->lpips : std::nullopt) << "\t" << cell(row.body.lpips)
        << "\n";
  }
  out << "aggregate\t" << cell(report.face_ssim_mean) << "\t" << cell(report.body_ssim_mean)
      << "\t" << cell(report.face_lpips_mean) << "\t" << cell(report.body_lpips_mean) << "\n";
  if (!out) fail(ErrorCode::io_error, "failed writing " + path);
}

}  // namespace retarget
