/*
 * Copyright 2026 The Consensus Denoising Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "consensus/autodiff/tape.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace consensus::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const Shape& Var::shape() const { return tape_->shape(id_); }
std::size_t Var::size() const { return tape_->value(id_).size(); }
std::span<const double> Var::value() const { return tape_->value(id_); }
std::span<const double> Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
  const auto v = value();
  if (v.size() != 1) throw std::invalid_argument("Var::item on a non-scalar node");
  return v[0];
}

Var Tape::constant(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size()) {
    throw std::invalid_argument("Tape::constant: value count does not match shape");
  }
  nodes_.push_back(Node{std::move(shape), std::move(values), {}, {}, {}, false, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size()) {
    throw std::invalid_argument("Tape::parameter: value count does not match shape");
  }
  nodes_.push_back(Node{std::move(shape), std::move(values), {}, {}, {}, recording_, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Shape shape, std::vector<double> values, std::vector<std::size_t> inputs,
                 BackwardFn backward) {
  bool needs = false;
  if (recording_) {
    needs = std::any_of(inputs.begin(), inputs.end(),
                        [&](std::size_t i) { return nodes_[i].requires_grad; });
  }
  Node node{std::move(shape), std::move(values), {}, {}, {}, needs, false};
  if (needs) {
    node.inputs = std::move(inputs);
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::span<double> Tape::grad_buffer(std::size_t id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(const Var& loss) {
  if (!recording_) throw std::logic_error("backward on a non-recording tape");
  if (&loss.tape() != this) throw std::invalid_argument("backward: loss belongs to another tape");
  if (nodes_[loss.id()].value.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got " +
                                std::to_string(nodes_[loss.id()].value.size()) + " elements");
  }
  for (auto& node : nodes_) {
    if (!node.is_leaf) node.grad.clear();
  }
  if (!nodes_[loss.id()].requires_grad) return;
  auto seed = grad_buffer(loss.id());
  seed[0] += 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.is_leaf || !node.requires_grad || node.grad.empty()) continue;
    node.backward(*this, id);
  }
  // Release intermediate storage; leaf gradients are what callers read.
  for (auto& node : nodes_) {
    if (!node.is_leaf && node.backward) node.grad.clear();
  }
}

void Tape::zero_grad() {
  for (auto& node : nodes_) std::fill(node.grad.begin(), node.grad.end(), 0.0);
}

}  // namespace consensus::ad
