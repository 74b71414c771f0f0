// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/nn/ops.hpp"
#include "core/nn/params.hpp"

using namespace retarget;
using namespace retarget::nn;

namespace {

Tensor<double> random_tensor(std::vector<int> shape, std::mt19937_64& rng, double stddev = 1.0) {
  Tensor<double> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

// Central-difference gradient check on a few entries of one leaf.
template <typename LossFn>
void gradcheck(LossFn loss_fn, const NodePtr<double>& leaf, int n_checks, double eps,
               double tol, std::mt19937_64& rng) {
  leaf->zero_grad();
  backward(loss_fn());
  for (int k = 0; k < n_checks; ++k) {
    const int64_t i = static_cast<int64_t>(rng() % leaf->value.numel());
    const double orig = leaf->value[i];
    leaf->value[i] = orig + eps;
    const double up = scalar_value(loss_fn());
    leaf->value[i] = orig - eps;
    const double down = scalar_value(loss_fn());
    leaf->value[i] = orig;
    const double fd = (up - down) / (2 * eps);
    const double an = leaf->grad[i];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    CHECK(rel < tol);
  }
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor<float> t({2, 3});
  CHECK(t.numel() == 6);
  for (int64_t i = 0; i < 6; ++i) CHECK(t[i] == 0.0f);
  t[4] = 2.5f;
  Tensor<float> shared = t;  // shares storage
  CHECK(shared[4] == 2.5f);
  Tensor<float> deep = t.clone();
  t[4] = 1.0f;
  CHECK(deep[4] == 2.5f);
  CHECK_THROWS_AS(t.reshaped({4, 2}), Error);
  CHECK(t.reshaped({3, 2}).dim(0) == 3);
}

TEST_CASE("conv2d gradients (double, central differences)") {
  std::mt19937_64 rng(101);
  auto x = make_leaf(random_tensor({2, 3, 9, 7}, rng), true);
  auto w = make_leaf(random_tensor({4, 3, 3, 3}, rng, 0.5), true);
  auto b = make_leaf(random_tensor({4}, rng, 0.5), true);
  auto loss = [&] { return mean_all(tanh_op(conv2d(x, w, b, 2, 1))); };
  gradcheck(loss, w, 8, 1e-6, 1e-6, rng);
  x->zero_grad(); w->zero_grad(); b->zero_grad();
  gradcheck(loss, x, 8, 1e-6, 1e-6, rng);
  x->zero_grad(); w->zero_grad(); b->zero_grad();
  gradcheck(loss, b, 4, 1e-6, 1e-6, rng);
}

TEST_CASE("conv_transpose2d gradients and shape") {
  std::mt19937_64 rng(102);
  auto x = make_leaf(random_tensor({1, 4, 5, 6}, rng), true);
  auto w = make_leaf(random_tensor({4, 3, 3, 3}, rng, 0.5), true);
  auto b = make_leaf(random_tensor({3}, rng, 0.5), true);
  auto out = conv_transpose2d(x, w, b, 2, 1, 1);
  CHECK(out->value.shape() == std::vector<int>{1, 3, 10, 12});
  auto loss = [&] { return mean_all(abs_op(conv_transpose2d(x, w, b, 2, 1, 1))); };
  gradcheck(loss, w, 8, 1e-6, 1e-6, rng);
  x->zero_grad(); w->zero_grad(); b->zero_grad();
  gradcheck(loss, x, 8, 1e-6, 1e-6, rng);
}

TEST_CASE("instance_norm: zero mean, unit variance, gradients") {
  std::mt19937_64 rng(103);
  auto x = make_leaf(random_tensor({2, 3, 6, 5}, rng, 3.0), true);
  auto y = instance_norm(x);
  const int64_t plane = 30;
  for (int p = 0; p < 6; ++p) {
    double mean = 0, var = 0;
    for (int64_t i = 0; i < plane; ++i) mean += y->value[p * plane + i];
    mean /= plane;
    for (int64_t i = 0; i < plane; ++i) {
      const double d = y->value[p * plane + i] - mean;
      var += d * d;
    }
    var /= plane;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
  auto loss = [&] { return mean_all(sigmoid(instance_norm(x))); };
  gradcheck(loss, x, 10, 1e-6, 1e-5, rng);
}

TEST_CASE("pooling, padding, pointwise op gradients") {
  std::mt19937_64 rng(104);
  auto x = make_leaf(random_tensor({1, 2, 8, 8}, rng), true);
  auto loss = [&] {
    auto h = reflect_pad2d(x, 2);
    h = avg_pool2d(h, 2, 2);
    h = max_pool2d(h, 2, 2);
    h = leaky_relu(h, 0.2);
    return mean_all(softplus(h));
  };
  gradcheck(loss, x, 10, 1e-6, 1e-5, rng);
}

TEST_CASE("channel_affine and linear gradients") {
  std::mt19937_64 rng(105);
  auto x = make_leaf(random_tensor({2, 3, 4, 4}, rng), true);
  auto loss = [&] {
    auto h = channel_affine<double>(x, {0.5, 2.0, -1.0}, {0.1, -0.2, 0.3});
    auto g = global_avg_pool(h);
    static auto w = make_leaf(random_tensor({2, 3}, rng, 0.5), false);
    static auto b = make_leaf(random_tensor({2}, rng, 0.5), false);
    return mean_all(tanh_op(linear(g, w, b)));
  };
  gradcheck(loss, x, 10, 1e-6, 1e-6, rng);
}

TEST_CASE("detach cuts the graph") {
  auto x = make_leaf(Tensor<double>::full({2, 2}, 3.0), true);
  auto y = mean_all(mul(detach(x), x));  // d/dx should be detach(x) = 3/4 each
  backward(y);
  for (int i = 0; i < 4; ++i) CHECK(x->grad[i] == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("backward accumulates through shared subgraphs") {
  auto x = make_leaf(Tensor<double>::full({1}, 2.0), true);
  auto y = add(mul(x, x), x);  // x^2 + x, dy/dx = 2x + 1 = 5
  backward(mean_all(y));
  CHECK(x->grad[0] == doctest::Approx(5.0));
}

TEST_CASE("softplus at zero equals log 2") {
  auto x = make_leaf(Tensor<double>::zeros({4}), false);
  auto y = softplus(x);
  for (int i = 0; i < 4; ++i) CHECK(y->value[i] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adam minimizes a quadratic deterministically") {
  auto run = [] {
    ParamStore<float> store(9);
    auto w = store.normal("w", {8}, 1.0f);
    Adam<float> adam(store, 0.05);
    for (int it = 0; it < 400; ++it) {
      auto loss = mean_all(mul(w, w));
      store.zero_grads();
      backward(loss);
      adam.step();
    }
    double sum = 0;
    for (int i = 0; i < 8; ++i) sum += std::abs(w->value[i]);
    return sum;
  };
  const double a = run(), b = run();
  CHECK(a < 1e-3);
  CHECK(a == b);  // bit-identical across runs
}

TEST_CASE("parameter store rejects duplicates and reports counts") {
  ParamStore<float> store(1);
  store.zeros("w", {3, 4});
  CHECK_THROWS_AS(store.zeros("w", {3, 4}), Error);
  store.zeros("b", {4});
  CHECK(store.parameter_count() == 16);
  CHECK(store.find("b") != nullptr);
  CHECK(store.find("nope") == nullptr);
}
