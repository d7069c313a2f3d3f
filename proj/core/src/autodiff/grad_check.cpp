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

#include "consensus/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "consensus/numerics/rng.hpp"

namespace consensus::ad {
namespace {

double evaluate(const GraphBuilder& builder, const std::vector<GradInput>& point) {
  Tape tape(false);
  std::vector<Var> inputs;
  inputs.reserve(point.size());
  for (const auto& in : point) inputs.push_back(tape.parameter(in.shape, in.values));
  return builder(tape, inputs).item();
}

}  // namespace

GradCheckReport grad_check(const GraphBuilder& builder, const std::vector<GradInput>& point,
                           const GradCheckOptions& options) {
  Tape tape;
  std::vector<Var> inputs;
  inputs.reserve(point.size());
  for (const auto& in : point) inputs.push_back(tape.parameter(in.shape, in.values));
  const Var loss = builder(tape, inputs);
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  for (const auto& v : inputs) {
    const auto g = v.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(v.size(), 0.0);
  }

  GradCheckReport report;
  Rng rng(options.seed);
  std::vector<GradInput> probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    std::vector<std::size_t> coords(point[i].values.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_input > 0 && coords.size() > options.max_coords_per_input) {
      shuffle(coords, rng);
      coords.resize(options.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t j : coords) {
      const double x0 = point[i].values[j];
      const double h = options.h_scale * std::max(1.0, std::fabs(x0));
      probe[i].values[j] = x0 + h;
      const double up = evaluate(builder, probe);
      probe[i].values[j] = x0 - h;
      const double down = evaluate(builder, probe);
      probe[i].values[j] = x0;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::fabs(numeric - analytic[i][j]) / std::max(1.0, std::fabs(analytic[i][j]));
      ++report.coords_checked;
      if (!std::isnan(report.max_rel_error) && (std::isnan(err) || err > report.max_rel_error)) {
        report.max_rel_error = err;
        report.worst_input = i;
        report.worst_index = j;
        report.analytic_at_worst = analytic[i][j];
        report.numeric_at_worst = numeric;
      }
    }
  }
  report.passed = std::isfinite(report.max_rel_error) && report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace consensus::ad
