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

#include "consensus/evalcli/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace consensus {
namespace {

// HU/1000 reports in HU; normalized MR images report in units of 1e-3.
double unit_scale(Unit unit) { return unit == Unit::kDimensionless ? 1.0 : 1000.0; }

std::vector<double> gaussian_taps(std::size_t size, double sigma) {
  std::vector<double> taps(size);
  const double center = 0.5 * (static_cast<double>(size) - 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - center;
    taps[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable "valid" filtering.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += taps[t] * img[i * w + j + t];
      rows[i * ow + j] = s;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += taps[t] * rows[(i + t) * ow + j];
      out[i * ow + j] = s;
    }
  }
  return out;
}

Grid2D clip_window_hu(const Grid2D& g) {
  Grid2D out(g.height, g.width);
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.data[i] = std::clamp(1000.0 * g.data[i], kLiverWindowLowHu, kLiverWindowHighHu) - kLiverWindowLowHu;
  }
  return out;
}

}  // namespace

double rmse(const Grid2D& a, const Grid2D& b, Unit unit) {
  if (!a.same_shape(b)) throw std::invalid_argument("rmse: shape mismatch");
  if (a.size() == 0) throw std::invalid_argument("rmse: empty grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  return unit_scale(unit) * std::sqrt(sum / static_cast<double>(a.size()));
}

double rmse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("rmse: shape mismatch");
  if (a.pixels() == 0) throw std::invalid_argument("rmse: empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) sum += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  return unit_scale(a.unit) * std::sqrt(sum / static_cast<double>(a.pixels()));
}

double ssim(const Grid2D& a, const Grid2D& b, const SsimOptions& o) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  if (o.window == 0 || o.window > a.height || o.window > a.width) {
    throw std::invalid_argument("ssim: window larger than image");
  }
  if (!(o.dynamic_range > 0.0)) throw std::invalid_argument("ssim: dynamic range must be positive");
  const auto taps = gaussian_taps(o.window, o.sigma);
  const std::size_t h = a.height, w = a.width;
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a.data[i] * a.data[i];
    bb[i] = b.data[i] * b.data[i];
    ab[i] = a.data[i] * b.data[i];
  }
  const auto mu_a = filter_valid(a.data, h, w, taps);
  const auto mu_b = filter_valid(b.data, h, w, taps);
  const auto e_aa = filter_valid(aa, h, w, taps);
  const auto e_bb = filter_valid(bb, h, w, taps);
  const auto e_ab = filter_valid(ab, h, w, taps);
  const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
  const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return 100.0 * total / static_cast<double>(mu_a.size());
}

double ssim_ct(const Grid2D& a, const Grid2D& reference) {
  SsimOptions o;
  o.dynamic_range = kLiverWindowHighHu - kLiverWindowLowHu;
  return ssim(clip_window_hu(a), clip_window_hu(reference), o);
}

double ssim_mr(const Image& a, const Image& reference) {
  const Grid2D ma = a.magnitude();
  const Grid2D mb = reference.magnitude();
  SsimOptions o;
  o.dynamic_range = *std::max_element(mb.data.begin(), mb.data.end());
  if (!(o.dynamic_range > 0.0)) o.dynamic_range = 1.0;
  return ssim(ma, mb, o);
}

double ssim_for(Modality modality, const Image& a, const Image& reference) {
  if (modality == Modality::kCt) return ssim_ct(a.channel(0), reference.channel(0));
  return ssim_mr(a, reference);
}

}  // namespace consensus
