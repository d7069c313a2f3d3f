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

#include "consensus/autodiff/tape.hpp"

namespace consensus::ad {

// 4-D tensors are NCHW. Every operator throws std::invalid_argument on shape
// mismatch or when its operands live on different tapes.

/// Stride-1 cross-correlation with zero padding (k-1)/2 plus per-channel bias.
/// x: [N,Cin,H,W], w: [Cout,Cin,k,k] with k odd, b: [Cout] -> [N,Cout,H,W].
Var conv2d(const Var& x, const Var& w, const Var& b);

/// max(x, 0); the derivative at exactly 0 is taken as 0.
Var relu(const Var& x);

enum class PoolMode { kAverage, kMax };

/// 2x2 average pooling, stride 2. H and W must be even.
Var downsample2(const Var& x);
/// 2x2 max pooling, stride 2; ties route the gradient to the first maximum.
Var max_pool2(const Var& x);
Var pool2(const Var& x, PoolMode mode);

/// Nearest-neighbour 2x upsampling.
Var upsample2(const Var& x);

/// Concatenates along the channel axis.
Var concat_channels(const Var& a, const Var& b);

/// Sum of squares of every element, as a one-element node.
Var sq_norm(const Var& x);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product.
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double alpha);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double alpha, const Var& x) { return scale(x, alpha); }

}  // namespace consensus::ad
