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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace consensus::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

class Tape;

/// Lightweight handle to a node recorded on a Tape. Copies share the node.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> value() const;
  /// Gradient slot; empty span if the node never received a gradient.
  std::span<const double> grad() const;
  /// Value of a one-element node.
  double item() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in creation order (hence topologically sorted) and
/// replays them in reverse on backward().
///
/// Gradient contract: parameter gradients accumulate across backward() calls
/// and are cleared only by zero_grad(); intermediate gradients are recomputed
/// on every call. Calling backward() twice therefore doubles parameter grads.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  /// A non-recording tape evaluates forward values only; backward() throws.
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  Var constant(Shape shape, std::vector<double> values);
  Var parameter(Shape shape, std::vector<double> values);

  /// Reverse sweep from a one-element loss node.
  void backward(const Var& loss);
  /// Clears every gradient slot, parameters included.
  void zero_grad();

  std::size_t size() const { return nodes_.size(); }

  // Operator-author interface.
  Var record(Shape shape, std::vector<double> values, std::vector<std::size_t> inputs,
             BackwardFn backward);
  const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
  std::span<const double> value(std::size_t id) const { return nodes_[id].value; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Zero-initialized on first access.
  std::span<double> grad_buffer(std::size_t id);

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
  };

  std::vector<Node> nodes_;
  bool recording_;
};

}  // namespace consensus::ad
