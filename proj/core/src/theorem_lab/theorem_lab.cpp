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

#include "consensus/theorem_lab/theorem_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "consensus/ct_sim/ct_pipeline.hpp"
#include "consensus/numerics/error.hpp"

namespace consensus {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LinearFit fit_linear(std::span<const double> x, std::span<const double> n1, std::span<const double> n2) {
  if (x.size() != n1.size() || x.size() != n2.size()) throw std::invalid_argument("fit_linear: size mismatch");
  if (x.empty()) throw std::invalid_argument("fit_linear: no samples");
  double den = 0.0, num_c = 0.0, num_n = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double input = x[i] + n1[i];
    den += input * input;
    num_c += input * x[i];
    num_n += input * (x[i] + n2[i]);
  }
  if (!(den > 0.0)) throw NumericError("fit_linear: degenerate denominator sum (x+n1)^2 = 0");
  return {num_c / den, num_n / den, x.size()};
}

NoisyObjectiveTerms decompose_noisy_objective(std::span<const double> y, std::span<const double> x,
                                              std::span<const double> n2, std::size_t samples) {
  if (y.size() != x.size() || y.size() != n2.size()) {
    throw std::invalid_argument("decompose_noisy_objective: size mismatch");
  }
  if (samples == 0) throw std::invalid_argument("decompose_noisy_objective: no samples");
  NoisyObjectiveTerms t;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - (x[i] + n2[i]);
    t.noisy_objective += r * r;
    t.clean_objective += (y[i] - x[i]) * (y[i] - x[i]);
    t.cross_term += 2.0 * n2[i] * y[i];
    t.constant_term += n2[i] * n2[i] + 2.0 * n2[i] * x[i];
  }
  const double inv = 1.0 / static_cast<double>(samples);
  t.noisy_objective *= inv;
  t.clean_objective *= inv;
  t.cross_term *= inv;
  t.constant_term *= inv;
  return t;
}

ConvergenceTable convergence_experiment(const std::vector<std::size_t>& sizes, std::size_t trials,
                                        double sigma, const Rng& rng, double x_value) {
  if (trials == 0) throw std::invalid_argument("convergence_experiment: trials must be >= 1");
  ConvergenceTable table;
  table.sizes = sizes;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t n = sizes[s];
    std::vector<double> gaps, thetas;
    const std::vector<double> x(n, x_value);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng stream = rng.fork(s * trials + t);
      const auto n1 = gaussian(stream, n, sigma);
      const auto n2 = gaussian(stream, n, sigma);
      const LinearFit fit = fit_linear(x, n1, n2);
      const double gap = std::fabs(fit.theta_n - fit.theta_c);
      table.trials.push_back({n, t, fit.theta_c, fit.theta_n, gap});
      gaps.push_back(gap);
      thetas.push_back(fit.theta_c);
    }
    table.median_gap.push_back(median(gaps));
    table.median_theta_c.push_back(median(thetas));
  }
  // Ordinary least squares in log-log space.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(sizes.size());
  bool positive = sizes.size() >= 2;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (!(table.median_gap[s] > 0.0)) positive = false;
    const double lx = std::log(static_cast<double>(sizes[s]));
    const double ly = std::log(table.median_gap[s]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  table.slope = positive ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return table;
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
  out << "N,trial,theta_c,theta_n,gap\n";
  out.precision(17);
  for (const auto& t : table.trials) {
    out << t.n << ',' << t.trial << ',' << t.theta_c << ',' << t.theta_n << ',' << t.gap << '\n';
  }
}

double CrossTermProbe::z_score() const {
  if (standard_error == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return estimate / standard_error;
}

CrossTermProbe cross_term_probe(const NoiseGenerator& generator, const ModelParams& network, std::size_t m,
                                Rng& rng) {
  if (m < 2) throw std::invalid_argument("cross_term_probe: need at least 2 draws");
  // Welford accumulation keeps the variance stable for large m.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    NoiseDraw draw = generator(rng);
    const Image& in = draw.input;
    if (!in.same_shape(draw.n2)) throw std::invalid_argument("cross_term_probe: generator shape mismatch");
    const auto y = infer(network, {1, in.channels, in.height, in.width}, in.data);
    double value = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) value += 2.0 * draw.n2.data[i] * y[i];
    const double delta = value - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(m - 1);
  return {mean, std::sqrt(variance / static_cast<double>(m)), m};
}

NoiseGenerator ct_split_generator(const CtAcquisition& acquisition, double bias) {
  return [&acquisition, bias](Rng& rng) {
    const auto& cfg = acquisition.config();
    const Sinogram noisy = insert_noise(acquisition.noiseless_sinogram(), cfg.dose, rng);
    const auto [first, second] = split_odd_even(noisy);
    NoiseDraw draw;
    draw.input = Image::from_grid(attenuation_to_hu1000(fbp_hann(first, cfg.grid), cfg));
    Grid2D r2 = attenuation_to_hu1000(fbp_hann(second, cfg.grid), cfg);
    const Grid2D& reference = acquisition.half_reference(1);
    for (std::size_t i = 0; i < r2.size(); ++i) r2.data[i] = r2.data[i] - reference.data[i] + bias;
    draw.n2 = Image::from_grid(r2);
    return draw;
  };
}

}  // namespace consensus
