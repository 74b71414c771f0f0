// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "core/nn/autograd.hpp"

namespace retarget::nn {

// Owns the named trainable leaves of one network. Names are stable and are
// the checkpoint keys.
template <typename T>
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : rng_(seed) {}

  NodePtr<T> normal(const std::string& name, std::vector<int> shape, T stddev) {
    Tensor<T> t(shape);
    std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(dist(rng_));
    return insert(name, std::move(t));
  }

  // He/Kaiming initialization for a conv weight [Cout,Cin,kh,kw] (fan-in).
  NodePtr<T> kaiming(const std::string& name, std::vector<int> shape) {
    int64_t fan_in = 1;
    for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
    return normal(name, shape, static_cast<T>(std::sqrt(2.0 / static_cast<double>(fan_in))));
  }

  NodePtr<T> zeros(const std::string& name, std::vector<int> shape) {
    return insert(name, Tensor<T>(shape));
  }

  const std::vector<std::pair<std::string, NodePtr<T>>>& entries() const { return entries_; }

  NodePtr<T> find(const std::string& name) const {
    for (const auto& [n, p] : entries_)
      if (n == name) return p;
    return nullptr;
  }

  int64_t parameter_count() const {
    int64_t n = 0;
    for (const auto& [name, p] : entries_) n += p->value.numel();
    return n;
  }

  void set_requires_grad(bool on) {
    for (auto& [name, p] : entries_) p->requires_grad = on;
  }

  void zero_grads() {
    for (auto& [name, p] : entries_) p->zero_grad();
  }

 private:
  NodePtr<T> insert(const std::string& name, Tensor<T> t) {
    if (find(name)) fail(ErrorCode::internal, "duplicate parameter name: " + name);
    auto node = make_leaf(std::move(t), true);
    entries_.emplace_back(name, node);
    return node;
  }

  std::vector<std::pair<std::string, NodePtr<T>>> entries_;
  std::mt19937_64 rng_;
};

// Adam with bias correction. State is keyed by parameter order, which is
// stable for a given network build.
template <typename T>
class Adam {
 public:
  Adam(ParamStore<T>& store, double lr, double beta1 = 0.5, double beta2 = 0.999,
       double eps = 1e-8)
      : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& [name, p] : store.entries()) {
      m_.push_back(Tensor<T>(p->value.shape()));
      v_.push_back(Tensor<T>(p->value.shape()));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    size_t idx = 0;
    for (const auto& [name, p] : store_.entries()) {
      Tensor<T>& m = m_[idx];
      Tensor<T>& v = v_[idx];
      ++idx;
      if (!p->grad.defined()) continue;
      T* w = p->value.data();
      const T* g = p->grad.data();
      for (int64_t i = 0; i < p->value.numel(); ++i) {
        const double gi = static_cast<double>(g[i]);
        m[i] = static_cast<T>(beta1_ * m[i] + (1.0 - beta1_) * gi);
        v[i] = static_cast<T>(beta2_ * v[i] + (1.0 - beta2_) * gi * gi);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] = static_cast<T>(w[i] - lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }

 private:
  ParamStore<T>& store_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace retarget::nn
