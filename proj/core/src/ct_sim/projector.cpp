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

#include "consensus/ct_sim/projector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "consensus/numerics/fft.hpp"

namespace consensus {
namespace {

constexpr double kStep = 0.5;

struct RayGeometry {
  double center;    // image center in pixel index units
  double half_len;  // ray half length
  std::size_t samples;
};

RayGeometry ray_geometry(std::size_t n) {
  RayGeometry g;
  g.center = 0.5 * (static_cast<double>(n) - 1.0);
  g.half_len = 0.5 * std::sqrt(2.0) * static_cast<double>(n) + 1.0;
  g.samples = static_cast<std::size_t>(std::ceil(2.0 * g.half_len / kStep)) + 1;
  return g;
}

// Visits bilinear taps of every sample along a ray: fn(flat_index, weight).
template <typename Fn>
void trace_ray(std::size_t n, const RayGeometry& g, double cos_t, double sin_t, double offset, Fn&& fn) {
  const auto ni = static_cast<std::ptrdiff_t>(n);
  for (std::size_t k = 0; k < g.samples; ++k) {
    const double t = -g.half_len + kStep * static_cast<double>(k);
    // x runs along columns, y upward (rows decrease).
    const double x = offset * cos_t - t * sin_t;
    const double y = offset * sin_t + t * cos_t;
    const double col = g.center + x;
    const double row = g.center - y;
    const double c0f = std::floor(col);
    const double r0f = std::floor(row);
    const auto c0 = static_cast<std::ptrdiff_t>(c0f);
    const auto r0 = static_cast<std::ptrdiff_t>(r0f);
    if (c0 < -1 || r0 < -1 || c0 >= ni || r0 >= ni) continue;
    const double fc = col - c0f;
    const double fr = row - r0f;
    const double w00 = (1.0 - fr) * (1.0 - fc) * kStep;
    const double w01 = (1.0 - fr) * fc * kStep;
    const double w10 = fr * (1.0 - fc) * kStep;
    const double w11 = fr * fc * kStep;
    const bool r0_in = r0 >= 0, r1_in = r0 + 1 < ni, c0_in = c0 >= 0, c1_in = c0 + 1 < ni;
    if (r0_in && c0_in) fn(static_cast<std::size_t>(r0 * ni + c0), w00);
    if (r0_in && c1_in) fn(static_cast<std::size_t>(r0 * ni + c0 + 1), w01);
    if (r1_in && c0_in) fn(static_cast<std::size_t>((r0 + 1) * ni + c0), w10);
    if (r1_in && c1_in) fn(static_cast<std::size_t>((r0 + 1) * ni + c0 + 1), w11);
  }
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace

std::size_t default_detector_count(std::size_t n) {
  const auto half = static_cast<std::size_t>(std::ceil(0.5 * std::sqrt(2.0) * static_cast<double>(n)));
  return 2 * half + 3;
}

std::vector<double> uniform_angles(std::size_t views) {
  std::vector<double> angles(views);
  for (std::size_t v = 0; v < views; ++v) {
    angles[v] = std::numbers::pi * static_cast<double>(v) / static_cast<double>(views);
  }
  return angles;
}

Sinogram radon(const Grid2D& image, std::size_t views, std::size_t detectors, double detector_spacing) {
  if (views < 1) throw std::invalid_argument("radon: views must be >= 1");
  return radon(image, uniform_angles(views), detectors, detector_spacing);
}

Sinogram radon(const Grid2D& image, const std::vector<double>& angles, std::size_t detectors,
               double detector_spacing) {
  if (image.height != image.width) throw std::invalid_argument("radon: image must be square");
  if (angles.empty()) throw std::invalid_argument("radon: views must be >= 1");
  if (detectors < 1) throw std::invalid_argument("radon: detectors must be >= 1");
  if (!(detector_spacing > 0.0)) throw std::invalid_argument("radon: detector spacing must be positive");
  Sinogram sino;
  sino.views = angles.size();
  sino.detectors = detectors;
  sino.detector_spacing = detector_spacing;
  sino.angles = angles;
  sino.data.assign(sino.views * detectors, 0.0);
  const std::size_t n = image.height;
  const RayGeometry g = ray_geometry(n);
  for (std::size_t v = 0; v < sino.views; ++v) {
    const double c = std::cos(angles[v]);
    const double s = std::sin(angles[v]);
    for (std::size_t d = 0; d < detectors; ++d) {
      double sum = 0.0;
      trace_ray(n, g, c, s, sino.detector_offset(d), [&](std::size_t idx, double w) { sum += w * image.data[idx]; });
      sino.at(v, d) = sum;
    }
  }
  return sino;
}

Grid2D radon_adjoint(const Sinogram& sino, std::size_t n) {
  Grid2D out(n, n);
  const RayGeometry g = ray_geometry(n);
  for (std::size_t v = 0; v < sino.views; ++v) {
    const double c = std::cos(sino.angles[v]);
    const double s = std::sin(sino.angles[v]);
    for (std::size_t d = 0; d < sino.detectors; ++d) {
      const double value = sino.at(v, d);
      trace_ray(n, g, c, s, sino.detector_offset(d), [&](std::size_t idx, double w) { out.data[idx] += w * value; });
    }
  }
  return out;
}

Sinogram insert_noise(const Sinogram& sino, const DoseModel& dose, Rng& rng) {
  if (!(dose.dose > 0.0 && dose.dose <= 1.0)) throw std::invalid_argument("insert_noise: dose must be in (0, 1]");
  const double incident = dose.i0 * dose.dose;
  if (!(incident >= 1.0)) throw std::invalid_argument("insert_noise: I0 * dose must be >= 1");
  Sinogram out = sino;
  for (auto& p : out.data) {
    const double lambda = incident * std::exp(-p);
    const auto counts = std::max<std::uint64_t>(rng.poisson(lambda), 1);
    p = -std::log(static_cast<double>(counts) / incident);
  }
  return out;
}

std::pair<Sinogram, Sinogram> split_odd_even(const Sinogram& sino) {
  if (sino.views % 2 != 0) throw std::invalid_argument("split_odd_even: view count must be even");
  Sinogram first, second;
  for (Sinogram* s : {&first, &second}) {
    s->views = sino.views / 2;
    s->detectors = sino.detectors;
    s->detector_spacing = sino.detector_spacing;
    s->data.reserve(s->views * sino.detectors);
  }
  for (std::size_t v = 0; v < sino.views; ++v) {
    Sinogram& dst = (v % 2 == 0) ? first : second;
    dst.angles.push_back(sino.angles[v]);
    const auto row = sino.data.begin() + static_cast<std::ptrdiff_t>(v * sino.detectors);
    dst.data.insert(dst.data.end(), row, row + static_cast<std::ptrdiff_t>(sino.detectors));
  }
  return {std::move(first), std::move(second)};
}

std::vector<double> ramp_hann_response(std::size_t padded_length, double detector_spacing) {
  const std::size_t p = padded_length;
  std::vector<Complex> kernel(p);
  const double tau = detector_spacing;
  for (std::size_t i = 0; i < p; ++i) {
    const std::ptrdiff_t m = i <= p / 2 ? static_cast<std::ptrdiff_t>(i)
                                        : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(p);
    double h = 0.0;
    if (m == 0) {
      h = 1.0 / (4.0 * tau * tau);
    } else if (m % 2 != 0) {
      const double md = static_cast<double>(m);
      h = -1.0 / (std::numbers::pi * std::numbers::pi * md * md * tau * tau);
    }
    // Discrete convolution carries a factor of the sample spacing.
    kernel[i] = Complex(h * tau, 0.0);
  }
  Fft1d fft(p);
  fft.forward(kernel);
  std::vector<double> response(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double k = i <= p / 2 ? static_cast<double>(i) : static_cast<double>(p - i);
    const double f_ratio = k / (0.5 * static_cast<double>(p));
    const double hann = 0.5 * (1.0 + std::cos(std::numbers::pi * f_ratio));
    response[i] = kernel[i].real() * hann;
  }
  return response;
}

Grid2D fbp_hann(const Sinogram& sino, std::size_t n) {
  if (sino.views < 1 || sino.detectors < 1) throw std::invalid_argument("fbp_hann: empty sinogram");
  const double coverage = static_cast<double>(sino.detectors) * sino.detector_spacing;
  if (coverage < std::sqrt(2.0) * static_cast<double>(n)) {
    throw std::invalid_argument("fbp_hann: detector array does not cover the image diagonal");
  }
  const std::size_t padded = next_pow2(2 * sino.detectors);
  const auto response = ramp_hann_response(padded, sino.detector_spacing);
  Fft1d fft(padded);

  std::vector<double> filtered(sino.views * sino.detectors);
  std::vector<Complex> buf(padded);
  for (std::size_t v = 0; v < sino.views; ++v) {
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    for (std::size_t d = 0; d < sino.detectors; ++d) buf[d] = Complex(sino.at(v, d), 0.0);
    fft.forward(buf);
    for (std::size_t i = 0; i < padded; ++i) buf[i] *= response[i];
    fft.inverse(buf);
    for (std::size_t d = 0; d < sino.detectors; ++d) filtered[v * sino.detectors + d] = buf[d].real();
  }

  Grid2D out(n, n);
  const double center = 0.5 * (static_cast<double>(n) - 1.0);
  const double det_center = 0.5 * static_cast<double>(sino.detectors - 1);
  const double weight = std::numbers::pi / static_cast<double>(sino.views);
  const auto last = static_cast<std::ptrdiff_t>(sino.detectors) - 1;
  for (std::size_t v = 0; v < sino.views; ++v) {
    const double c = std::cos(sino.angles[v]) / sino.detector_spacing;
    const double s = std::sin(sino.angles[v]) / sino.detector_spacing;
    const double* q = filtered.data() + v * sino.detectors;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = center - static_cast<double>(i);
      double* row = out.data.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = static_cast<double>(j) - center;
        const double pos = x * c + y * s + det_center;
        const double fl = std::floor(pos);
        const auto d0 = static_cast<std::ptrdiff_t>(fl);
        if (d0 < 0 || d0 >= last) continue;
        const double f = pos - fl;
        row[j] += (1.0 - f) * q[d0] + f * q[d0 + 1];
      }
    }
  }
  for (auto& v : out.data) v *= weight;
  return out;
}

}  // namespace consensus
