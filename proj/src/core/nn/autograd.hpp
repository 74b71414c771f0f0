// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core/nn/tensor.hpp"

namespace retarget::nn {

// Reverse-mode tape node. Graphs are built dynamically by the ops in
// ops.hpp; backward() walks the DAG once in reverse topological order.
template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on demand, same shape as value
  bool requires_grad = false;
  std::vector<NodePtr<T>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node<T>&)> backward_op;

  Tensor<T>& ensure_grad() {
    if (!grad.defined()) grad = Tensor<T>::zeros(value.shape());
    return grad;
  }

  void zero_grad() {
    if (grad.defined()) grad.fill(T(0));
  }
};

template <typename T>
NodePtr<T> make_leaf(Tensor<T> value, bool requires_grad = false) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

template <typename T>
NodePtr<T> make_node(Tensor<T> value, std::vector<NodePtr<T>> parents,
                     std::function<void(Node<T>&)> backward_op) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p && p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  if (n->requires_grad) n->backward_op = std::move(backward_op);
  return n;
}

// Value-only view of an existing node: parents are dropped, so gradients do
// not flow through it.
template <typename T>
NodePtr<T> detach(const NodePtr<T>& x) {
  return make_leaf(x->value, false);
}

// Accumulates droot/dnode into every reachable node that requires grad.
// root must be a scalar (numel == 1) unless seed is provided.
template <typename T>
void backward(const NodePtr<T>& root, const Tensor<T>* seed = nullptr) {
  if (!root->requires_grad) return;
  if (!seed && root->value.numel() != 1)
    fail(ErrorCode::shape_mismatch, "backward() needs a scalar root or an explicit seed");

  // Iterative post-order over parents.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent && parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  if (seed) {
    Tensor<T>& g = root->ensure_grad();
    const T* s = seed->data();
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += s[i];
  } else {
    root->ensure_grad()[0] += T(1);
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_op && node->grad.defined()) node->backward_op(*node);
  }
}

}  // namespace retarget::nn
