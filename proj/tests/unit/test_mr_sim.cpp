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

#include <algorithm>
#include <cmath>

#include "consensus/mr_sim/mr_pipeline.hpp"
#include "consensus/numerics/fft.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace consensus;

namespace {

ComplexGrid2D random_complex(std::size_t n, std::uint64_t seed) {
  const auto re = testing::random_values(n * n, seed);
  const auto im = testing::random_values(n * n, seed + 1000);
  ComplexGrid2D g(n, n);
  for (std::size_t i = 0; i < n * n; ++i) g.data[i] = {re[i], im[i]};
  return g;
}

double max_diff(const ComplexGrid2D& a, const ComplexGrid2D& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  return worst;
}

SamplingMask mask_from(std::size_t lines, std::size_t center_keep, std::initializer_list<std::size_t> random) {
  SamplingMask m;
  m.sampled.assign(lines, false);
  m.center_keep = center_keep;
  m.probability = 0.25;
  for (std::size_t i = 0; i < lines; ++i) m.sampled[i] = m.is_center(i);
  for (std::size_t i : random) m.sampled[i] = true;
  return m;
}

MrAcquisition knee(std::size_t n, std::uint64_t seed, double accel = 4.0, std::size_t center = 16) {
  Rng rng(seed);
  const Phantom mag = random_knee_phantom(rng);
  const PhaseField phase = PhaseField::random(rng);
  MrConfig cfg;
  cfg.grid = n;
  cfg.accel = accel;
  cfg.center_keep = center;
  return MrAcquisition(mag, phase, cfg);
}

}  // namespace

TEST_CASE("make_mask: full sampling, centered block and sampling rate") {
  Rng rng(1);
  const SamplingMask full = make_mask(64, 1.0, 8, rng);
  CHECK(full.count() == 64);
  const SamplingMask m = make_mask(64, 4.0, 8, rng);
  for (std::size_t i = 0; i < 64; ++i) {
    if (i >= 28 && i <= 35) CHECK(m.sampled[i]);
    CHECK(m.is_center(i) == (i >= 28 && i <= 35));
  }
  double total = 0.0;
  for (int t = 0; t < 1000; ++t) total += static_cast<double>(make_mask(128, 4.0, 16, rng).count()) / 128.0;
  CHECK(std::fabs(total / 1000.0 - 0.25) < 0.02 * 0.25);
  CHECK(m.probability == doctest::Approx((16.0 - 8.0) / 56.0));
  CHECK_THROWS_AS(make_mask(64, 8.0, 16, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_mask(64, 4.0, 64, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_mask(64, 0.5, 8, rng), std::invalid_argument);
}

TEST_CASE("split_mask partitions the random lines and keeps the center in both") {
  const SamplingMask m = mask_from(64, 8, {10, 20, 40});
  Rng rng(2);
  const auto [a, b] = split_mask(m, rng);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK((a.sampled[i] || b.sampled[i]) == m.sampled[i]);
    CHECK((a.sampled[i] && b.sampled[i]) == m.is_center(i));
  }
  const auto ra = a.random_lines(), rb = b.random_lines();
  CHECK(ra.size() + rb.size() == 3);
  CHECK(std::max(ra.size(), rb.size()) - std::min(ra.size(), rb.size()) <= 1);
  CHECK(a.probability == doctest::Approx(0.125));

  Rng r1(3), r2(3);
  for (int t = 0; t < 50; ++t) {
    const SamplingMask big = make_mask(128, 4.0, 16, r1);
    const auto [x, y] = split_mask(big, r1);
    const auto [x2, y2] = split_mask(make_mask(128, 4.0, 16, r2), r2);
    CHECK(x.sampled == x2.sampled);
    CHECK(y.sampled == y2.sampled);
    const auto nx = x.random_lines().size(), ny = y.random_lines().size();
    CHECK(std::max(nx, ny) - std::min(nx, ny) <= 1);
    for (std::size_t i = 0; i < 128; ++i) {
      CHECK((x.sampled[i] || y.sampled[i]) == big.sampled[i]);
      CHECK((x.sampled[i] && y.sampled[i]) == big.is_center(i));
    }
  }
}

TEST_CASE("zero_fill_recon: full mask, center-only mask, linearity") {
  const std::size_t n = 32;
  const KSpace k{fft2(random_complex(n, 4))};
  Rng rng(5);
  CHECK(max_diff(zero_fill_recon(k, make_mask(n, 1.0, 8, rng), 1.0), ifft2(k.spectrum)) < 1e-12);

  const SamplingMask center = mask_from(n, 8, {});
  const ComplexGrid2D c1 = zero_fill_recon(k, center, 1.0);
  CHECK(max_diff(c1, zero_fill_recon(k, center, 7.5)) == 0.0);
  ComplexGrid2D low = k.spectrum;
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t c = dft_to_centered(row, n);
    if (c < 12 || c > 19) {
      for (std::size_t col = 0; col < n; ++col) low(row, col) = 0.0;
    }
  }
  CHECK(max_diff(c1, ifft2(low)) < 1e-12);

  const KSpace k2{fft2(random_complex(n, 6))};
  KSpace mix{ComplexGrid2D(n, n)};
  for (std::size_t i = 0; i < n * n; ++i) mix.spectrum.data[i] = 0.3 * k.spectrum.data[i] - 2.1 * k2.spectrum.data[i];
  const SamplingMask m = make_mask(n, 4.0, 8, rng);
  const ComplexGrid2D a = zero_fill_recon(k, m, 3.0), b = zero_fill_recon(k2, m, 3.0);
  const ComplexGrid2D ab = zero_fill_recon(mix, m, 3.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) worst = std::max(worst, std::abs(ab.data[i] - (0.3 * a.data[i] - 2.1 * b.data[i])));
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(zero_fill_recon(k, m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(zero_fill_recon(k, mask_from(16, 4, {}), 1.0), std::invalid_argument);
}

TEST_CASE("amplified zero-fill is unbiased over random masks") {
  const std::size_t n = 32, trials = 2000;
  const KSpace k{fft2(random_complex(n, 7))};
  const ComplexGrid2D full = ifft2(k.spectrum);
  std::vector<Complex> sum(n * n), sum2(n * n);
  Rng rng(8);
  for (std::size_t t = 0; t < trials; ++t) {
    const SamplingMask m = make_mask(n, 4.0, 4, rng);
    const ComplexGrid2D r = zero_fill_recon(k, m, 1.0 / m.probability);
    for (std::size_t i = 0; i < n * n; ++i) {
      sum[i] += r.data[i];
      sum2[i] += Complex(r.data[i].real() * r.data[i].real(), r.data[i].imag() * r.data[i].imag());
    }
  }
  std::size_t over = 0;
  for (std::size_t i = 0; i < n * n; ++i) {
    const Complex mean = sum[i] / static_cast<double>(trials);
    const double var_re = (sum2[i].real() - trials * mean.real() * mean.real()) / (trials - 1);
    const double var_im = (sum2[i].imag() - trials * mean.imag() * mean.imag()) / (trials - 1);
    if (std::fabs(mean.real() - full.data[i].real()) > 5.0 * std::sqrt(var_re / trials)) ++over;
    if (std::fabs(mean.imag() - full.data[i].imag()) > 5.0 * std::sqrt(var_im / trials)) ++over;
  }
  CHECK(over == 0);
}

TEST_CASE("complex phantom carries the magnitude and a nontrivial phase") {
  Rng rng(9);
  const Phantom mag = random_knee_phantom(rng);
  const PhaseField phase = PhaseField::random(rng);
  const ComplexGrid2D g = complex_phantom(mag, phase, 64);
  const Grid2D ref = rasterize(mag, 64, 64);
  double imag_energy = 0.0;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    CHECK(std::abs(g.data[i]) == doctest::Approx(ref.data[i]).epsilon(1e-12));
    imag_energy += g.data[i].imag() * g.data[i].imag();
  }
  CHECK(imag_energy > 0.0);
}

TEST_CASE("MR split pairs: full sampling, normalization and the disjoint-split identity") {
  const MrAcquisition full = knee(64, 10, 1.0, 8);
  Rng rng(11);
  const SplitPair p = full.draw(rng);
  CHECK(p.r1.channels == 2);
  CHECK(p.r1.unit == Unit::kNormalized);
  CHECK(testing::max_abs_diff(p.est.data, p.clean->data) < 1e-12);
  // A disjoint split of a full mask cannot give two full masks; the two halves
  // instead average back to the full image.
  std::vector<double> avg(p.r1.data.size());
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (p.r1.data[i] + p.r2.data[i]);
  CHECK(testing::max_abs_diff(avg, p.clean->data) < 1e-12);

  const MrAcquisition acq = knee(64, 12);
  const SplitPair q = acq.draw(rng);
  double peak = 0.0;
  for (double v : q.clean->data) peak = std::max(peak, std::fabs(v));
  CHECK(peak <= 1.5);
  CHECK(peak > 0.5);
  CHECK(q.meta.at("modality") == "mr");
  Rng again(11);
  full.draw(again);
  CHECK(acq.draw(again).r1.data == q.r1.data);
}

TEST_CASE("MR split artifacts: weak correlation and zero mean") {
  const std::size_t n = 64, draws = 400;
  const MrAcquisition acq = knee(n, 13, 4.0, 8);
  Rng rng(14);
  double s12 = 0.0, s11 = 0.0, s22 = 0.0;
  std::vector<double> sum(2 * n * n, 0.0), sum2(2 * n * n, 0.0);
  double p_split = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const SplitPair p = acq.draw(rng);
    for (std::size_t i = 0; i < p.r1.data.size(); ++i) {
      const double a = p.r1.data[i] - p.clean->data[i];
      const double b = p.r2.data[i] - p.clean->data[i];
      s12 += a * b;
      s11 += a * a;
      s22 += b * b;
      sum[i] += a;
      sum2[i] += a * a;
    }
  }
  Rng mrng(0);
  p_split = 0.5 * make_mask(n, 4.0, 8, mrng).probability;
  const double rho = s12 / std::sqrt(s11 * s22);
  CHECK(std::fabs(rho) < 0.1);
  // Per line, the two inclusion indicators are exclusive: rho = -p/(1-p) for split rate p.
  CHECK(rho == doctest::Approx(-p_split / (1.0 - p_split)).epsilon(0.25));

  std::size_t over = 0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum[i] / draws;
    const double var = (sum2[i] - draws * mean * mean) / (draws - 1);
    // Image columns the object never touches carry no artifact at all.
    if (var < 1e-24) {
      CHECK(std::fabs(mean) < 1e-12);
      continue;
    }
    if (std::fabs(mean) > 5.0 * std::sqrt(var / draws)) ++over;
  }
  CHECK(over == 0);
}
