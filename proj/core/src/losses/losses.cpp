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

#include "consensus/losses/losses.hpp"

#include <stdexcept>

namespace consensus {
namespace {

double batch_scale(const ad::Var& v) {
  const auto& s = v.shape();
  if (s.empty() || s[0] == 0) throw std::invalid_argument("loss: empty batch");
  return 1.0 / static_cast<double>(s[0]);
}

void require_same(const ad::Var& a, const ad::Var& b, const char* name) {
  if (a.shape() != b.shape()) throw std::invalid_argument(std::string(name) + ": shape mismatch");
}

}  // namespace

ad::Var loss_noise2clean(const ad::Var& y, const ad::Var& x) {
  require_same(y, x, "loss_noise2clean");
  return ad::scale(ad::sq_norm(ad::sub(y, x)), batch_scale(y));
}

ad::Var loss_noise2noise(const ad::Var& y1, const ad::Var& target2) {
  require_same(y1, target2, "loss_noise2noise");
  return ad::scale(ad::sq_norm(ad::sub(y1, target2)), batch_scale(y1));
}

ad::Var loss_consensus(const ad::Var& y1, const ad::Var& y2, const ad::Var& r1, const ad::Var& r2) {
  require_same(y1, y2, "loss_consensus");
  require_same(y1, r1, "loss_consensus");
  require_same(y1, r2, "loss_consensus");
  const ad::Var cross1 = ad::sq_norm(ad::sub(y1, r2));
  const ad::Var cross2 = ad::sq_norm(ad::sub(y2, r1));
  const ad::Var agreement = ad::sq_norm(ad::sub(y1, y2));
  const ad::Var per_batch =
      ad::add(ad::add(ad::scale(cross1, 0.5), ad::scale(cross2, 0.5)), ad::scale(agreement, -0.25));
  return ad::scale(per_batch, batch_scale(y1));
}

ad::Var aggregate(const ad::Var& y1, const ad::Var& y2) {
  require_same(y1, y2, "aggregate");
  return ad::scale(ad::add(y1, y2), 0.5);
}

ad::Var loss_weight_decay(std::span<const ad::Var> theta1, std::span<const ad::Var> theta2) {
  if (theta1.empty()) throw std::invalid_argument("loss_weight_decay: no parameters");
  ad::Var total = ad::sq_norm(theta1.front());
  for (std::size_t i = 1; i < theta1.size(); ++i) total = ad::add(total, ad::sq_norm(theta1[i]));
  for (const auto& v : theta2) total = ad::add(total, ad::sq_norm(v));
  return total;
}

ad::Var loss_consistency(const ad::Var& z, const ad::Var& est) {
  require_same(z, est, "loss_consistency");
  return ad::scale(ad::sq_norm(ad::sub(z, est)), batch_scale(z));
}

LossBreakdown loss_total(double l_n, double l_w, double l_r, double beta_w, double beta_r) {
  if (beta_w < 0.0 || beta_r < 0.0) throw std::invalid_argument("loss_total: negative weight");
  return {l_n, l_w, l_r, l_n + beta_w * l_w + beta_r * l_r, beta_w, beta_r};
}

ad::Var loss_total(const ad::Var& l_n, const ad::Var& l_w, const ad::Var& l_r, double beta_w,
                   double beta_r) {
  if (beta_w < 0.0 || beta_r < 0.0) throw std::invalid_argument("loss_total: negative weight");
  return ad::add(ad::add(l_n, ad::scale(l_w, beta_w)), ad::scale(l_r, beta_r));
}

std::pair<double, double> factorization_identity(std::span<const double> y1,
                                                 std::span<const double> y2,
                                                 std::span<const double> x) {
  if (y1.size() != y2.size() || y1.size() != x.size()) {
    throw std::invalid_argument("factorization_identity: size mismatch");
  }
  double lhs = 0.0, a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mean = 0.5 * (y1[i] + y2[i]) - x[i];
    lhs += mean * mean;
    a += (y1[i] - x[i]) * (y1[i] - x[i]);
    b += (y2[i] - x[i]) * (y2[i] - x[i]);
    c += (y1[i] - y2[i]) * (y1[i] - y2[i]);
  }
  return {lhs, 0.5 * a + 0.5 * b - 0.25 * c};
}

}  // namespace consensus
