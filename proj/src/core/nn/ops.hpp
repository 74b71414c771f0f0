// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "core/nn/autograd.hpp"

namespace retarget::nn {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using CMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

namespace detail {

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Gathers sliding-window patches of image [C, imH, imW] into
// col [C*kh*kw, outH*outW]. Out-of-bounds taps read as zero.
template <typename T>
void im2col(const T* image, int channels, int im_h, int im_w, int kh, int kw, int stride,
            int pad, int out_h, int out_w, T* col) {
  const int64_t plane = static_cast<int64_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        T* dst = col + (((static_cast<int64_t>(c) * kh + ky) * kw) + kx) * plane;
        const T* src = image + static_cast<int64_t>(c) * im_h * im_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= im_h) {
            for (int ox = 0; ox < out_w; ++ox) dst[oy * out_w + ox] = T(0);
            continue;
          }
          const T* row = src + static_cast<int64_t>(iy) * im_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[oy * out_w + ox] = (ix >= 0 && ix < im_w) ? row[ix] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im(const T* col, int channels, int im_h, int im_w, int kh, int kw, int stride,
            int pad, int out_h, int out_w, T* image) {
  const int64_t plane = static_cast<int64_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const T* src = col + (((static_cast<int64_t>(c) * kh + ky) * kw) + kx) * plane;
        T* dst = image + static_cast<int64_t>(c) * im_h * im_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= im_h) continue;
          T* row = dst + static_cast<int64_t>(iy) * im_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < im_w) row[ix] += src[oy * out_w + ox];
          }
        }
      }
    }
  }
}

template <typename T>
void check_nchw(const Tensor<T>& t, const char* who) {
  if (t.rank() != 4) fail(ErrorCode::shape_mismatch, std::string(who) + ": expected NCHW tensor");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and reduction ops
// ---------------------------------------------------------------------------

template <typename T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b) {
  if (!a->value.same_shape(b->value))
    fail(ErrorCode::shape_mismatch, "add: " + a->value.shape_string() + " vs " + b->value.shape_string());
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + pb[i];
  return make_node<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    const T* g = n.grad.data();
    if (a->requires_grad) {
      T* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) ga[i] += g[i];
    }
    if (b->requires_grad) {
      T* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) gb[i] += g[i];
    }
  });
}

template <typename T>
NodePtr<T> sub(const NodePtr<T>& a, const NodePtr<T>& b) {
  if (!a->value.same_shape(b->value))
    fail(ErrorCode::shape_mismatch, "sub: " + a->value.shape_string() + " vs " + b->value.shape_string());
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] - pb[i];
  return make_node<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    const T* g = n.grad.data();
    if (a->requires_grad) {
      T* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) ga[i] += g[i];
    }
    if (b->requires_grad) {
      T* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b) {
  if (!a->value.same_shape(b->value))
    fail(ErrorCode::shape_mismatch, "mul: shape mismatch");
  Tensor<T> out(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * pb[i];
  return make_node<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    const T* g = n.grad.data();
    const T* pa = a->value.data();
    const T* pb = b->value.data();
    if (a->requires_grad) {
      T* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) ga[i] += g[i] * pb[i];
    }
    if (b->requires_grad) {
      T* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) gb[i] += g[i] * pa[i];
    }
  });
}

template <typename T>
NodePtr<T> scale(const NodePtr<T>& x, T s) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] * s;
  return make_node<T>(std::move(out), {x}, [x, s](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += g[i] * s;
  });
}

template <typename T>
NodePtr<T> add_scalar(const NodePtr<T>& x, T c) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] + c;
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += g[i];
  });
}

template <typename T>
NodePtr<T> mean_all(const NodePtr<T>& x) {
  const int64_t n_elems = x->value.numel();
  T acc = T(0);
  const T* px = x->value.data();
  for (int64_t i = 0; i < n_elems; ++i) acc += px[i];
  Tensor<T> out = Tensor<T>::scalar(acc / static_cast<T>(n_elems));
  return make_node<T>(std::move(out), {x}, [x, n_elems](Node<T>& n) {
    if (!x->requires_grad) return;
    const T g = n.grad[0] / static_cast<T>(n_elems);
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n_elems; ++i) gx[i] += g;
  });
}

template <typename T>
NodePtr<T> abs_op(const NodePtr<T>& x) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::abs(px[i]);
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* px = x->value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      gx[i] += px[i] > T(0) ? g[i] : (px[i] < T(0) ? -g[i] : T(0));
  });
}

template <typename T>
NodePtr<T> relu(const NodePtr<T>& x) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] > T(0) ? px[i] : T(0);
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* px = x->value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      if (px[i] > T(0)) gx[i] += g[i];
  });
}

template <typename T>
NodePtr<T> leaky_relu(const NodePtr<T>& x, T slope) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] > T(0) ? px[i] : slope * px[i];
  return make_node<T>(std::move(out), {x}, [x, slope](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* px = x->value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += px[i] > T(0) ? g[i] : slope * g[i];
  });
}

template <typename T>
NodePtr<T> tanh_op(const NodePtr<T>& x) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::tanh(px[i]);
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* py = n.value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += g[i] * (T(1) - py[i] * py[i]);
  });
}

template <typename T>
NodePtr<T> sigmoid(const NodePtr<T>& x) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = T(1) / (T(1) + std::exp(-px[i]));
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* py = n.value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += g[i] * py[i] * (T(1) - py[i]);
  });
}

// log(1 + exp(x)), evaluated stably.
template <typename T>
NodePtr<T> softplus(const NodePtr<T>& x) {
  Tensor<T> out(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) {
    const T v = px[i];
    po[i] = std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v)));
  }
  return make_node<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    const T* g = n.grad.data();
    const T* px = x->value.data();
    T* gx = x->ensure_grad().data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      gx[i] += g[i] / (T(1) + std::exp(-px[i]));
  });
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

template <typename T>
NodePtr<T> concat_channels(const std::vector<NodePtr<T>>& xs) {
  if (xs.empty()) fail(ErrorCode::shape_mismatch, "concat_channels: empty input");
  detail::check_nchw(xs[0]->value, "concat_channels");
  const int n = xs[0]->value.dim(0);
  const int h = xs[0]->value.dim(2);
  const int w = xs[0]->value.dim(3);
  int channels = 0;
  for (const auto& x : xs) {
    detail::check_nchw(x->value, "concat_channels");
    if (x->value.dim(0) != n || x->value.dim(2) != h || x->value.dim(3) != w)
      fail(ErrorCode::shape_mismatch, "concat_channels: incompatible shapes");
    channels += x->value.dim(1);
  }
  Tensor<T> out({n, channels, h, w});
  const int64_t plane = static_cast<int64_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    int64_t coff = 0;
    for (const auto& x : xs) {
      const int ci = x->value.dim(1);
      const T* src = x->value.data() + static_cast<int64_t>(b) * ci * plane;
      T* dst = out.data() + (static_cast<int64_t>(b) * channels + coff) * plane;
      std::copy(src, src + static_cast<int64_t>(ci) * plane, dst);
      coff += ci;
    }
  }
  std::vector<NodePtr<T>> parents(xs.begin(), xs.end());
  return make_node<T>(std::move(out), std::move(parents), [xs, n, channels, plane](Node<T>& nd) {
    const T* g = nd.grad.data();
    for (int b = 0; b < n; ++b) {
      int64_t coff = 0;
      for (const auto& x : xs) {
        const int ci = x->value.dim(1);
        if (x->requires_grad) {
          T* gx = x->ensure_grad().data() + static_cast<int64_t>(b) * ci * plane;
          const T* gs = g + (static_cast<int64_t>(b) * channels + coff) * plane;
          for (int64_t i = 0; i < static_cast<int64_t>(ci) * plane; ++i) gx[i] += gs[i];
        }
        coff += ci;
      }
    }
  });
}

template <typename T>
NodePtr<T> reflect_pad2d(const NodePtr<T>& x, int pad) {
  detail::check_nchw(x->value, "reflect_pad2d");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
  if (pad >= h || pad >= w) fail(ErrorCode::shape_mismatch, "reflect_pad2d: pad too large");
  const int oh = h + 2 * pad, ow = w + 2 * pad;
  auto reflect = [](int i, int size) {
    if (i < 0) return -i;
    if (i >= size) return 2 * size - 2 - i;
    return i;
  };
  Tensor<T> out({n, c, oh, ow});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const T* src = x->value.data() + (static_cast<int64_t>(b) * c + ch) * h * w;
      T* dst = out.data() + (static_cast<int64_t>(b) * c + ch) * oh * ow;
      for (int oy = 0; oy < oh; ++oy) {
        const int iy = reflect(oy - pad, h);
        for (int ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = src[iy * w + reflect(ox - pad, w)];
      }
    }
  return make_node<T>(std::move(out), {x}, [x, pad, n, c, h, w, oh, ow, reflect](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < c; ++ch) {
        T* gdst = gx + (static_cast<int64_t>(b) * c + ch) * h * w;
        const T* gsrc = g + (static_cast<int64_t>(b) * c + ch) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = reflect(oy - pad, h);
          for (int ox = 0; ox < ow; ++ox) gdst[iy * w + reflect(ox - pad, w)] += gsrc[oy * ow + ox];
        }
      }
  });
}

template <typename T>
NodePtr<T> avg_pool2d(const NodePtr<T>& x, int k, int stride) {
  detail::check_nchw(x->value, "avg_pool2d");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
  const int oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;
  if (oh <= 0 || ow <= 0) fail(ErrorCode::shape_mismatch, "avg_pool2d: input too small");
  Tensor<T> out({n, c, oh, ow});
  const T inv = T(1) / static_cast<T>(k * k);
  for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
    const T* src = x->value.data() + p * h * w;
    T* dst = out.data() + p * oh * ow;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        T acc = T(0);
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            acc += src[(oy * stride + ky) * w + ox * stride + kx];
        dst[oy * ow + ox] = acc * inv;
      }
  }
  return make_node<T>(std::move(out), {x}, [x, k, stride, n, c, h, w, oh, ow, inv](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
      T* gdst = gx + p * h * w;
      const T* gsrc = g + p * oh * ow;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const T gv = gsrc[oy * ow + ox] * inv;
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx)
              gdst[(oy * stride + ky) * w + ox * stride + kx] += gv;
        }
    }
  });
}

template <typename T>
NodePtr<T> max_pool2d(const NodePtr<T>& x, int k, int stride) {
  detail::check_nchw(x->value, "max_pool2d");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
  const int oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;
  if (oh <= 0 || ow <= 0) fail(ErrorCode::shape_mismatch, "max_pool2d: input too small");
  Tensor<T> out({n, c, oh, ow});
  // argmax indices for the backward pass
  auto argmax = std::make_shared<std::vector<int32_t>>(static_cast<size_t>(out.numel()));
  for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
    const T* src = x->value.data() + p * h * w;
    T* dst = out.data() + p * oh * ow;
    int32_t* am = argmax->data() + p * oh * ow;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        T best = src[oy * stride * w + ox * stride];
        int32_t best_idx = oy * stride * w + ox * stride;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const int32_t idx = (oy * stride + ky) * w + ox * stride + kx;
            if (src[idx] > best) {
              best = src[idx];
              best_idx = idx;
            }
          }
        dst[oy * ow + ox] = best;
        am[oy * ow + ox] = best_idx;
      }
  }
  return make_node<T>(std::move(out), {x}, [x, argmax, n, c, h, w, oh, ow](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
      T* gdst = gx + p * h * w;
      const T* gsrc = g + p * oh * ow;
      const int32_t* am = argmax->data() + p * oh * ow;
      for (int64_t i = 0; i < static_cast<int64_t>(oh) * ow; ++i) gdst[am[i]] += gsrc[i];
    }
  });
}

// Per-channel y = x * scale[c] + bias[c] with constant (non-trainable)
// coefficients.
template <typename T>
NodePtr<T> channel_affine(const NodePtr<T>& x, std::vector<T> scale, std::vector<T> bias) {
  detail::check_nchw(x->value, "channel_affine");
  const int n = x->value.dim(0), c = x->value.dim(1);
  if (static_cast<int>(scale.size()) != c || static_cast<int>(bias.size()) != c)
    fail(ErrorCode::shape_mismatch, "channel_affine: coefficient count mismatch");
  const int64_t plane = static_cast<int64_t>(x->value.dim(2)) * x->value.dim(3);
  Tensor<T> out(x->value.shape());
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const T* src = x->value.data() + (static_cast<int64_t>(b) * c + ch) * plane;
      T* dst = out.data() + (static_cast<int64_t>(b) * c + ch) * plane;
      for (int64_t i = 0; i < plane; ++i) dst[i] = src[i] * scale[ch] + bias[ch];
    }
  return make_node<T>(std::move(out), {x}, [x, scale, n, c, plane](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < c; ++ch) {
        const int64_t off = (static_cast<int64_t>(b) * c + ch) * plane;
        for (int64_t i = 0; i < plane; ++i) gx[off + i] += g[off + i] * scale[ch];
      }
  });
}

// [N,C,H,W] -> [N,C]
template <typename T>
NodePtr<T> global_avg_pool(const NodePtr<T>& x) {
  detail::check_nchw(x->value, "global_avg_pool");
  const int n = x->value.dim(0), c = x->value.dim(1);
  const int64_t plane = static_cast<int64_t>(x->value.dim(2)) * x->value.dim(3);
  Tensor<T> out({n, c});
  for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
    const T* src = x->value.data() + p * plane;
    T acc = T(0);
    for (int64_t i = 0; i < plane; ++i) acc += src[i];
    out[p] = acc / static_cast<T>(plane);
  }
  return make_node<T>(std::move(out), {x}, [x, n, c, plane](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
      const T gv = g[p] / static_cast<T>(plane);
      T* dst = gx + p * plane;
      for (int64_t i = 0; i < plane; ++i) dst[i] += gv;
    }
  });
}

// x [N,F] * w [O,F]^T + b [O] -> [N,O]
template <typename T>
NodePtr<T> linear(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b) {
  if (x->value.rank() != 2 || w->value.rank() != 2 || x->value.dim(1) != w->value.dim(1))
    fail(ErrorCode::shape_mismatch, "linear: bad shapes");
  const int n = x->value.dim(0), f = x->value.dim(1), o = w->value.dim(0);
  Tensor<T> out({n, o});
  MatMap<T>(out.data(), n, o).noalias() =
      CMatMap<T>(x->value.data(), n, f) * CMatMap<T>(w->value.data(), o, f).transpose();
  if (b) {
    if (b->value.numel() != o) fail(ErrorCode::shape_mismatch, "linear: bad bias");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < o; ++j) out[static_cast<int64_t>(i) * o + j] += b->value[j];
  }
  std::vector<NodePtr<T>> parents = b ? std::vector<NodePtr<T>>{x, w, b} : std::vector<NodePtr<T>>{x, w};
  return make_node<T>(std::move(out), std::move(parents), [x, w, b, n, f, o](Node<T>& nd) {
    CMatMap<T> g(nd.grad.data(), n, o);
    if (x->requires_grad)
      MatMap<T>(x->ensure_grad().data(), n, f).noalias() += g * CMatMap<T>(w->value.data(), o, f);
    if (w->requires_grad)
      MatMap<T>(w->ensure_grad().data(), o, f).noalias() +=
          g.transpose() * CMatMap<T>(x->value.data(), n, f);
    if (b && b->requires_grad) {
      T* gb = b->ensure_grad().data();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < o; ++j) gb[j] += nd.grad[static_cast<int64_t>(i) * o + j];
    }
  });
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

// x [N,Cin,H,W], w [Cout,Cin,kh,kw], optional b [Cout]
template <typename T>
NodePtr<T> conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b, int stride,
                  int pad) {
  detail::check_nchw(x->value, "conv2d");
  if (w->value.rank() != 4 || w->value.dim(1) != x->value.dim(1))
    fail(ErrorCode::shape_mismatch, "conv2d: weight " + w->value.shape_string() +
                                        " does not match input " + x->value.shape_string());
  const int n = x->value.dim(0), cin = x->value.dim(1), h = x->value.dim(2), wd = x->value.dim(3);
  const int cout = w->value.dim(0), kh = w->value.dim(2), kw = w->value.dim(3);
  const int oh = detail::conv_out_dim(h, kh, stride, pad);
  const int ow = detail::conv_out_dim(wd, kw, stride, pad);
  if (oh <= 0 || ow <= 0) fail(ErrorCode::shape_mismatch, "conv2d: input too small");
  const int krows = cin * kh * kw;
  const int64_t plane = static_cast<int64_t>(oh) * ow;

  Tensor<T> out({n, cout, oh, ow});
  std::vector<T> col(static_cast<size_t>(krows) * plane);
  for (int s = 0; s < n; ++s) {
    detail::im2col(x->value.data() + static_cast<int64_t>(s) * cin * h * wd, cin, h, wd, kh, kw,
                   stride, pad, oh, ow, col.data());
    MatMap<T>(out.data() + static_cast<int64_t>(s) * cout * plane, cout, plane).noalias() =
        CMatMap<T>(w->value.data(), cout, krows) * CMatMap<T>(col.data(), krows, plane);
  }
  if (b) {
    if (b->value.numel() != cout) fail(ErrorCode::shape_mismatch, "conv2d: bad bias");
    for (int s = 0; s < n; ++s)
      for (int c = 0; c < cout; ++c) {
        T* dst = out.data() + (static_cast<int64_t>(s) * cout + c) * plane;
        const T bv = b->value[c];
        for (int64_t i = 0; i < plane; ++i) dst[i] += bv;
      }
  }

  std::vector<NodePtr<T>> parents = b ? std::vector<NodePtr<T>>{x, w, b} : std::vector<NodePtr<T>>{x, w};
  auto backward = [x, w, b, n, cin, h, wd, cout, kh, kw, stride, pad, oh, ow, krows,
                   plane](Node<T>& nd) {
    std::vector<T> col(static_cast<size_t>(krows) * plane);
    for (int s = 0; s < n; ++s) {
      CMatMap<T> g(nd.grad.data() + static_cast<int64_t>(s) * cout * plane, cout, plane);
      if (w->requires_grad) {
        detail::im2col(x->value.data() + static_cast<int64_t>(s) * cin * h * wd, cin, h, wd, kh,
                       kw, stride, pad, oh, ow, col.data());
        MatMap<T>(w->ensure_grad().data(), cout, krows).noalias() +=
            g * CMatMap<T>(col.data(), krows, plane).transpose();
      }
      if (x->requires_grad) {
        MatMap<T>(col.data(), krows, plane).noalias() =
            CMatMap<T>(w->value.data(), cout, krows).transpose() * g;
        detail::col2im(col.data(), cin, h, wd, kh, kw, stride, pad, oh, ow,
                       x->ensure_grad().data() + static_cast<int64_t>(s) * cin * h * wd);
      }
      if (b && b->requires_grad) {
        T* gb = b->ensure_grad().data();
        const T* gp = nd.grad.data() + static_cast<int64_t>(s) * cout * plane;
        for (int c = 0; c < cout; ++c) {
          T acc = T(0);
          for (int64_t i = 0; i < plane; ++i) acc += gp[static_cast<int64_t>(c) * plane + i];
          gb[c] += acc;
        }
      }
    }
  };
  return make_node<T>(std::move(out), std::move(parents), std::move(backward));
}

// x [N,Cin,H,W], w [Cin,Cout,kh,kw], optional b [Cout]
template <typename T>
NodePtr<T> conv_transpose2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                            int stride, int pad, int out_pad) {
  detail::check_nchw(x->value, "conv_transpose2d");
  if (w->value.rank() != 4 || w->value.dim(0) != x->value.dim(1))
    fail(ErrorCode::shape_mismatch, "conv_transpose2d: weight does not match input");
  const int n = x->value.dim(0), cin = x->value.dim(1), h = x->value.dim(2), wd = x->value.dim(3);
  const int cout = w->value.dim(1), kh = w->value.dim(2), kw = w->value.dim(3);
  const int oh = (h - 1) * stride - 2 * pad + kh + out_pad;
  const int ow = (wd - 1) * stride - 2 * pad + kw + out_pad;
  if (oh <= 0 || ow <= 0) fail(ErrorCode::shape_mismatch, "conv_transpose2d: input too small");
  const int krows = cout * kh * kw;
  const int64_t in_plane = static_cast<int64_t>(h) * wd;

  Tensor<T> out({n, cout, oh, ow});
  std::vector<T> col(static_cast<size_t>(krows) * in_plane);
  for (int s = 0; s < n; ++s) {
    // col = W^T x, then scatter into the (larger) output image.
    MatMap<T>(col.data(), krows, in_plane).noalias() =
        CMatMap<T>(w->value.data(), cin, krows).transpose() *
        CMatMap<T>(x->value.data() + static_cast<int64_t>(s) * cin * in_plane, cin, in_plane);
    detail::col2im(col.data(), cout, oh, ow, kh, kw, stride, pad, h, wd,
                   out.data() + static_cast<int64_t>(s) * cout * oh * ow);
  }
  if (b) {
    if (b->value.numel() != cout) fail(ErrorCode::shape_mismatch, "conv_transpose2d: bad bias");
    const int64_t plane = static_cast<int64_t>(oh) * ow;
    for (int s = 0; s < n; ++s)
      for (int c = 0; c < cout; ++c) {
        T* dst = out.data() + (static_cast<int64_t>(s) * cout + c) * plane;
        const T bv = b->value[c];
        for (int64_t i = 0; i < plane; ++i) dst[i] += bv;
      }
  }

  std::vector<NodePtr<T>> parents = b ? std::vector<NodePtr<T>>{x, w, b} : std::vector<NodePtr<T>>{x, w};
  auto backward = [x, w, b, n, cin, h, wd, cout, kh, kw, stride, pad, oh, ow, krows,
                   in_plane](Node<T>& nd) {
    const int64_t out_plane = static_cast<int64_t>(oh) * ow;
    std::vector<T> col(static_cast<size_t>(krows) * in_plane);
    for (int s = 0; s < n; ++s) {
      const T* gout = nd.grad.data() + static_cast<int64_t>(s) * cout * out_plane;
      detail::im2col(gout, cout, oh, ow, kh, kw, stride, pad, h, wd, col.data());
      if (x->requires_grad)
        MatMap<T>(x->ensure_grad().data() + static_cast<int64_t>(s) * cin * in_plane, cin,
                  in_plane)
            .noalias() +=
            CMatMap<T>(w->value.data(), cin, krows) * CMatMap<T>(col.data(), krows, in_plane);
      if (w->requires_grad)
        MatMap<T>(w->ensure_grad().data(), cin, krows).noalias() +=
            CMatMap<T>(x->value.data() + static_cast<int64_t>(s) * cin * in_plane, cin, in_plane) *
            CMatMap<T>(col.data(), krows, in_plane).transpose();
      if (b && b->requires_grad) {
        T* gb = b->ensure_grad().data();
        for (int c = 0; c < cout; ++c) {
          T acc = T(0);
          for (int64_t i = 0; i < out_plane; ++i) acc += gout[static_cast<int64_t>(c) * out_plane + i];
          gb[c] += acc;
        }
      }
    }
  };
  return make_node<T>(std::move(out), std::move(parents), std::move(backward));
}

// Per-(sample, channel) normalization to zero mean / unit variance.
template <typename T>
NodePtr<T> instance_norm(const NodePtr<T>& x, T eps = T(1e-5)) {
  detail::check_nchw(x->value, "instance_norm");
  const int n = x->value.dim(0), c = x->value.dim(1);
  const int64_t plane = static_cast<int64_t>(x->value.dim(2)) * x->value.dim(3);
  Tensor<T> out(x->value.shape());
  Tensor<T> inv_std({n * c});
  for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
    const T* src = x->value.data() + p * plane;
    T mean = T(0);
    for (int64_t i = 0; i < plane; ++i) mean += src[i];
    mean /= static_cast<T>(plane);
    T var = T(0);
    for (int64_t i = 0; i < plane; ++i) {
      const T d = src[i] - mean;
      var += d * d;
    }
    var /= static_cast<T>(plane);
    const T istd = T(1) / std::sqrt(var + eps);
    inv_std[p] = istd;
    T* dst = out.data() + p * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] = (src[i] - mean) * istd;
  }
  return make_node<T>(std::move(out), {x}, [x, n, c, plane, inv_std](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    const T* y = nd.value.data();
    for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
      const T* gp = g + p * plane;
      const T* yp = y + p * plane;
      T gmean = T(0), gymean = T(0);
      for (int64_t i = 0; i < plane; ++i) {
        gmean += gp[i];
        gymean += gp[i] * yp[i];
      }
      gmean /= static_cast<T>(plane);
      gymean /= static_cast<T>(plane);
      const T istd = inv_std[p];
      T* gxp = gx + p * plane;
      for (int64_t i = 0; i < plane; ++i)
        gxp[i] += istd * (gp[i] - gmean - yp[i] * gymean);
    }
  });
}

// ---------------------------------------------------------------------------
// Convenience compositions
// ---------------------------------------------------------------------------

template <typename T>
NodePtr<T> l1_mean(const NodePtr<T>& a, const NodePtr<T>& b) {
  return mean_all(abs_op(sub(a, b)));
}

template <typename T>
NodePtr<T> sum_nodes(const std::vector<NodePtr<T>>& xs) {
  if (xs.empty()) fail(ErrorCode::shape_mismatch, "sum_nodes: empty");
  NodePtr<T> acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return acc;
}

template <typename T>
T scalar_value(const NodePtr<T>& x) {
  if (x->value.numel() != 1) fail(ErrorCode::shape_mismatch, "scalar_value: not a scalar");
  return x->value[0];
}

}  // namespace retarget::nn
