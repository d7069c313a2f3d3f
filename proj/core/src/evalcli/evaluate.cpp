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

#include "consensus/evalcli/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "consensus/numerics/error.hpp"
#include "consensus/numerics/pgm.hpp"

namespace consensus {
namespace {

constexpr std::string_view kHeader = "method,n,rmse_mean,rmse_std,ssim_mean,ssim_std,rmse_values,ssim_values";

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_exact(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("metrics csv: cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += exact(v[i]);
  }
  return s;
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (auto part : split(s, ';')) out.push_back(parse_exact(part));
  return out;
}

void score_model(const std::string& label, const TrainState* state, std::span<const SplitPair> test,
                 std::vector<MetricsRow>& rows) {
  if (!state) return;
  std::vector<Image> outputs;
  outputs.reserve(test.size());
  for (const auto& pair : test) outputs.push_back(denoise(*state, pair));
  rows.push_back(score_method(label, outputs, test));
}

}  // namespace

MetricsRow score_method(const std::string& method, std::span<const Image> outputs,
                        std::span<const SplitPair> test) {
  if (outputs.size() != test.size()) throw std::invalid_argument("score_method: output and test counts differ");
  MetricsRow row;
  row.method = method;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].clean) throw std::invalid_argument("score_method: test slice without clean reference");
    row.rmse.push_back(rmse(outputs[i], *test[i].clean));
    row.ssim.push_back(ssim_for(test[i].modality, outputs[i], *test[i].clean));
  }
  std::tie(row.rmse_mean, row.rmse_std) = mean_std(row.rmse);
  std::tie(row.ssim_mean, row.ssim_std) = mean_std(row.ssim);
  return row;
}

std::vector<MetricsRow> evaluate(const EvaluationModels& models, std::span<const SplitPair> test) {
  std::vector<MetricsRow> rows;
  std::vector<Image> inputs;
  inputs.reserve(test.size());
  for (const auto& pair : test) inputs.push_back(pair.est);
  rows.push_back(score_method("input", inputs, test));
  score_model("noise2noise", models.noise2noise, test, rows);
  score_model("consensus", models.consensus, test, rows);
  score_model("noise2clean", models.noise2clean, test, rows);
  return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.rmse.size() << ',' << exact(r.rmse_mean) << ',' << exact(r.rmse_std) << ','
        << exact(r.ssim_mean) << ',' << exact(r.ssim_std) << ',' << join(r.rmse) << ',' << join(r.ssim) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError("metrics csv: missing or unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw IoError("metrics csv: expected 8 fields, got " + std::to_string(f.size()));
    MetricsRow r;
    r.method = std::string(f[0]);
    r.rmse_mean = parse_exact(f[2]);
    r.rmse_std = parse_exact(f[3]);
    r.ssim_mean = parse_exact(f[4]);
    r.ssim_std = parse_exact(f[5]);
    r.rmse = parse_list(f[6]);
    r.ssim = parse_list(f[7]);
    if (r.rmse.size() != static_cast<std::size_t>(parse_exact(f[1])) || r.ssim.size() != r.rmse.size()) {
      throw IoError("metrics csv: value count mismatch for '" + r.method + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void report(const std::filesystem::path& dir, std::span<const MetricsRow> rows, Modality modality,
            std::span<const Preview> previews) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  {
    std::ofstream out(dir / "metrics.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write metrics.csv in '" + dir.string() + "'");
    write_metrics_csv(out, rows);
  }
  {
    const SsimOptions ssim;
    std::ofstream out(dir / "metrics_info.txt", std::ios::trunc);
    if (!out) throw IoError("cannot write metrics_info.txt in '" + dir.string() + "'");
    out << "modality=" << to_string(modality) << '\n'
        << "rmse_unit=" << (modality == Modality::kCt ? "HU" : "1e-3") << '\n'
        << "ssim_window=" << ssim.window << '\n'
        << "ssim_sigma=" << exact(ssim.sigma) << '\n'
        << "ssim_k1=" << exact(ssim.k1) << '\n'
        << "ssim_k2=" << exact(ssim.k2) << '\n'
        << "ssim_scale=100\n";
    if (modality == Modality::kCt) {
      out << "ssim_window_hu=" << exact(kLiverWindowLowHu) << ':' << exact(kLiverWindowHighHu) << '\n';
    }
  }
  if (previews.empty()) return;
  double mr_peak = 0.0;
  if (modality == Modality::kMr) {
    const Grid2D mag = previews.front().image.magnitude();
    mr_peak = *std::max_element(mag.data.begin(), mag.data.end());
    if (!(mr_peak > 0.0)) mr_peak = 1.0;
  }
  for (const auto& p : previews) {
    const auto path = dir / (p.label + ".pgm");
    if (modality == Modality::kCt) {
      write_pgm(path, p.image.channel(0), kLiverWindowLowHu / 1000.0, kLiverWindowHighHu / 1000.0);
    } else {
      write_pgm(path, p.image.magnitude(), 0.0, mr_peak);
    }
  }
}

}  // namespace consensus
