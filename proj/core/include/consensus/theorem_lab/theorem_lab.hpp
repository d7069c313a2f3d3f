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
#include <iosfwd>
#include <span>
#include <vector>

#include "consensus/losses/split_pair.hpp"
#include "consensus/model/unet.hpp"
#include "consensus/numerics/rng.hpp"

namespace consensus {

class CtAcquisition;

/// Closed-form least-squares gains of the scalar model f(v) = theta * v under
/// the clean-target and noisy-target objectives.
struct LinearFit {
  double theta_c = 0.0;
  double theta_n = 0.0;
  std::size_t count = 0;
};

/// theta_c = sum (x+n1) x / sum (x+n1)^2, theta_n = sum (x+n1)(x+n2) / sum (x+n1)^2.
/// Throws NumericError when the denominator vanishes, std::invalid_argument for
/// empty or mismatched inputs.
LinearFit fit_linear(std::span<const double> x, std::span<const double> n1, std::span<const double> n2);

/// Terms of the expansion
///   (1/N) sum ||y - (x+n2)||^2 = (1/N) sum ||y - x||^2 - (2/N) sum n2.y + (1/N) sum (n2.n2 + 2 n2.x)
struct NoisyObjectiveTerms {
  double noisy_objective = 0.0;
  double clean_objective = 0.0;
  double cross_term = 0.0;     // (2/N) sum n2.y
  double constant_term = 0.0;  // (1/N) sum (n2.n2 + 2 n2.x)
};

/// Each argument holds N samples of equal length, concatenated.
NoisyObjectiveTerms decompose_noisy_objective(std::span<const double> y, std::span<const double> x,
                                              std::span<const double> n2, std::size_t samples);

struct ConvergenceTrial {
  std::size_t n = 0;
  std::size_t trial = 0;
  double theta_c = 0.0;
  double theta_n = 0.0;
  double gap = 0.0;
};

struct ConvergenceTable {
  std::vector<std::size_t> sizes;
  std::vector<double> median_gap;
  std::vector<double> median_theta_c;
  std::vector<ConvergenceTrial> trials;
  /// Least-squares slope of log(median gap) against log(N); NaN if any gap is 0.
  double slope = 0.0;
};

/// x_i = x_value, n1, n2 ~ N(0, sigma^2) i.i.d. Trial t at size index s uses
/// the stream rng.fork(s * trials + t).
ConvergenceTable convergence_experiment(const std::vector<std::size_t>& sizes, std::size_t trials,
                                        double sigma, const Rng& rng, double x_value = 1.0);

/// CSV with columns N,trial,theta_c,theta_n,gap.
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);

/// One realization: the network input x + n1 and the second noise n2.
struct NoiseDraw {
  Image input;
  Image n2;
};
using NoiseGenerator = std::function<NoiseDraw(Rng&)>;

struct CrossTermProbe {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;

  /// estimate / standard_error (0 when both vanish).
  double z_score() const;
};

/// Monte-Carlo mean and standard error of 2 n2^T f(x + n1) over m draws with
/// a frozen network. Throws std::invalid_argument for m < 2.
CrossTermProbe cross_term_probe(const NoiseGenerator& generator, const ModelParams& network, std::size_t m,
                                Rng& rng);

/// Odd/even CT generator: input = r1, n2 = r2 - E[r2] where the expectation
/// is the noiseless reconstruction of the same views. bias is added to n2
/// (a non-zero value makes a positive control).
NoiseGenerator ct_split_generator(const CtAcquisition& acquisition, double bias = 0.0);

}  // namespace consensus
