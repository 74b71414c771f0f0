// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace retarget::nn {

// Dense contiguous tensor. Copying a Tensor shares storage (like a view of
// the whole buffer); use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_ = std::make_shared<std::vector<T>>(numel_of(shape_), T(0));
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data(), t.data() + t.numel(), value);
    return t;
  }

  static Tensor scalar(T value) { return full({1}, value); }

  static Tensor from_vector(std::vector<int> shape, std::vector<T> values) {
    if (numel_of(shape) != static_cast<int64_t>(values.size()))
      fail(ErrorCode::shape_mismatch, "tensor data does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<T>>(std::move(values));
    return t;
  }

  bool defined() const { return data_ != nullptr; }
  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }

  T& operator[](int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  // Same storage, new shape (numel must match).
  Tensor reshaped(std::vector<int> shape) const {
    if (numel_of(shape) != numel())
      fail(ErrorCode::shape_mismatch, "reshape changes element count");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t(shape_);
    const T* src = data();
    U* dst = t.data();
    for (int64_t i = 0; i < numel(); ++i) dst[i] = static_cast<U>(src[i]);
    return t;
  }

  void fill(T value) { std::fill(data(), data() + numel(), value); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string shape_string() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << ']';
    return os.str();
  }

  static int64_t numel_of(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
      if (d < 0) fail(ErrorCode::shape_mismatch, "negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  std::shared_ptr<std::vector<T>> data_;

  template <typename U>
  friend class Tensor;
};

}  // namespace retarget::nn
