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

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "consensus/numerics/error.hpp"
#include "consensus/numerics/fft.hpp"
#include "consensus/numerics/grid.hpp"
#include "consensus/numerics/pgm.hpp"
#include "consensus/numerics/rng.hpp"
#include "consensus/numerics/tensor_io.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace consensus;

namespace {

// Direct O(N^2) DFT, used as an independent reference for FFTW.
ComplexGrid2D naive_dft2(const ComplexGrid2D& g) {
  ComplexGrid2D out(g.height, g.width);
  for (std::size_t u = 0; u < g.height; ++u) {
    for (std::size_t v = 0; v < g.width; ++v) {
      Complex acc = 0.0;
      for (std::size_t y = 0; y < g.height; ++y) {
        for (std::size_t x = 0; x < g.width; ++x) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>(u * y) / static_cast<double>(g.height) +
                                static_cast<double>(v * x) / static_cast<double>(g.width));
          acc += g(y, x) * Complex(std::cos(phase), std::sin(phase));
        }
      }
      out(u, v) = acc;
    }
  }
  return out;
}

ComplexGrid2D random_complex(std::size_t h, std::size_t w, std::uint64_t seed) {
  ComplexGrid2D g(h, w);
  const auto v = testing::random_values(2 * h * w, seed);
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] = Complex(v[2 * i], v[2 * i + 1]);
  return g;
}

double rel_diff(const ComplexGrid2D& a, const ComplexGrid2D& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.data[i] - b.data[i]);
    den += std::norm(b.data[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("grid construction validates length and units") {
  CHECK_THROWS_AS(Grid2D(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
  const Grid2D g(2, 3, Unit::kHu1000);
  CHECK(g.size() == 6);
  CHECK(to_string(Unit::kHu1000) == "HU/1000");
  CHECK(unit_from_string("normalized") == Unit::kNormalized);
  CHECK(unit_from_string("dimensionless") == Unit::kDimensionless);
  CHECK_THROWS_AS(unit_from_string("HU"), std::invalid_argument);
  Grid2D bad(1, 2);
  bad.data[1] = std::nan("");
  CHECK_FALSE(all_finite(bad));
  CHECK(all_finite(g));
}

TEST_CASE("fft2 of a delta is constant one") {
  ComplexGrid2D g(4, 6);
  g(0, 0) = 1.0;
  const auto f = fft2(g);
  for (const auto& v : f.data) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(v.imag()) < 1e-15);
  }
}

TEST_CASE("fft2 of a constant concentrates at DC") {
  ComplexGrid2D g(5, 4);
  for (auto& v : g.data) v = Complex(2.5, 0.0);
  const auto f = fft2(g);
  CHECK(std::abs(f(0, 0) - Complex(50.0, 0.0)) < 1e-12);
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(std::abs(f.data[i]) < 1e-12);
}

TEST_CASE("ifft2 inverts the constant-image spectrum and maps zeros to zeros") {
  ComplexGrid2D spec(4, 4);
  spec(0, 0) = 16.0;
  for (const auto& v : ifft2(spec).data) CHECK(std::abs(v - Complex(1.0, 0.0)) < 1e-15);
  for (const auto& v : ifft2(ComplexGrid2D(3, 5)).data) CHECK(v == Complex(0.0, 0.0));
}

TEST_CASE("fft2 agrees with a direct DFT on odd and even sizes") {
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {5, 3}, {6, 7}}) {
    const auto g = random_complex(h, w, 11 + h * w);
    CHECK(rel_diff(fft2(g), naive_dft2(g)) < 1e-13);
  }
}

TEST_CASE("fft round trip and Parseval") {
  const auto g = random_complex(16, 16, 5);
  CHECK(rel_diff(ifft2(fft2(g)), g) < 1e-12);
  const auto f = fft2(g);
  double e_img = 0.0, e_spec = 0.0;
  for (const auto& v : g.data) e_img += std::norm(v);
  for (const auto& v : f.data) e_spec += std::norm(v);
  CHECK(std::fabs(e_img - e_spec / 256.0) < 1e-10 * e_img);
}

TEST_CASE("Fft1d matches the 2-D transform on a single row") {
  const auto g = random_complex(1, 12, 9);
  Fft1d plan(12);
  std::vector<Complex> row(g.data);
  plan.forward(row);
  const auto f = fft2(g);
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(row[i] - f.data[i]) < 1e-12);
  plan.inverse(row);
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(row[i] - g.data[i]) < 1e-14);
}

TEST_CASE("centered index helpers are inverse permutations") {
  for (std::size_t n : {1u, 2u, 7u, 8u, 64u}) {
    for (std::size_t c = 0; c < n; ++c) CHECK(dft_to_centered(centered_to_dft(c, n), n) == c);
    CHECK(centered_to_dft(n / 2, n) == 0);
  }
}

TEST_CASE("rng determinism and stream independence") {
  Rng a(42), b(42), c(42, 1);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100000; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
  Rng f1 = Rng(7).fork(3), f2 = Rng(7).fork(3);
  CHECK(f1.next_u64() == f2.next_u64());
  Rng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.below(5) < 5);
  }
}

TEST_CASE("gaussian degenerate, moments and errors") {
  Rng rng(3);
  CHECK(gaussian(rng, 5, 0.0) == std::vector<double>(5, 0.0));
  CHECK_THROWS_AS(gaussian(rng, 5, -1.0), std::invalid_argument);
  const auto v = gaussian(rng, 1000000, 1.0);
  double mean = 0.0, sq = 0.0;
  for (double x : v) {
    mean += x;
    sq += x * x;
  }
  mean /= 1e6;
  CHECK(std::fabs(mean) < 4.0 / 1000.0);
  CHECK(sq / 1e6 == doctest::Approx(1.0).epsilon(0.01));
  Rng r1(9), r2(9);
  CHECK(gaussian(r1, 50, 2.0) == gaussian(r2, 50, 2.0));
}

TEST_CASE("poisson sampler matches mean and variance in both regimes") {
  for (double mean : {0.5, 4.0, 30.0, 25000.0}) {
    Rng rng(17);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    CHECK(std::fabs(m - mean) < 5.0 * std::sqrt(mean / n));
    CHECK(var == doctest::Approx(mean).epsilon(0.03));
  }
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto w = v;
  Rng a(5), b(5);
  shuffle(v, a);
  shuffle(w, b);
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("CNDT 2x2 f64 file has the expected size and round trips bitwise") {
  const auto dir = testing::scratch_dir("cndt");
  const std::vector<double> values{1, 2, 3, 4};
  save_tensor(dir / "a.cndt", make_f64_record({2, 2}, values));
  CHECK(std::filesystem::file_size(dir / "a.cndt") == 4 + 1 + 1 + 1 + 8 + 32);
  const auto rec = load_tensor(dir / "a.cndt");
  CHECK(rec.dims == std::vector<std::uint32_t>{2, 2});
  CHECK(rec.dtype == DType::kF64);
  CHECK(record_to_f64(rec) == values);
}

TEST_CASE("CNDT round trips every dtype bitwise") {
  for (DType dt : {DType::kF32, DType::kF64, DType::kComplexF32, DType::kComplexF64}) {
    TensorRecord rec;
    rec.dims = {3, 1, 2};
    rec.dtype = dt;
    rec.payload.resize(rec.element_count() * dtype_size(dt));
    for (std::size_t i = 0; i < rec.payload.size(); ++i) rec.payload[i] = static_cast<std::byte>(i * 37 + 11);
    const auto bytes = encode_tensor(rec);
    const auto back = decode_tensor(bytes);
    CHECK(back.dims == rec.dims);
    CHECK(back.dtype == dt);
    CHECK(back.payload == rec.payload);
  }
}

TEST_CASE("CNDT diagnostics are distinct") {
  const auto good = encode_tensor(make_f64_record({2}, std::vector<double>{1.0, 2.0}));
  auto message = [](std::vector<std::byte> b) {
    try {
      decode_tensor(b);
    } catch (const IoError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  auto bad_magic = good;
  bad_magic[0] = static_cast<std::byte>('X');
  CHECK(message(bad_magic).find("bad magic") != std::string::npos);
  auto bad_version = good;
  bad_version[4] = static_cast<std::byte>(2);
  CHECK(message(bad_version).find("unsupported version") != std::string::npos);
  auto bad_dtype = good;
  bad_dtype[5] = static_cast<std::byte>(9);
  CHECK(message(bad_dtype).find("unknown dtype") != std::string::npos);
  auto no_dims = good;
  no_dims[6] = static_cast<std::byte>(0);
  CHECK(message(no_dims).find("ndim") != std::string::npos);
  auto truncated = good;
  truncated.pop_back();
  CHECK(message(truncated).find("truncated payload") != std::string::npos);
  auto header_only = std::vector<std::byte>(good.begin(), good.begin() + 8);
  CHECK(message(header_only).find("truncated header") != std::string::npos);
  auto trailing = good;
  trailing.push_back(std::byte{0});
  CHECK(message(trailing).find("trailing") != std::string::npos);
  CHECK_THROWS_AS(load_tensor("/nonexistent/dir/x.cndt"), IoError);
}

TEST_CASE("grid and complex grid files round trip") {
  const auto dir = testing::scratch_dir("grids");
  Grid2D g(3, 4, testing::random_values(12, 4), Unit::kHu1000);
  save_grid(dir / "g.cndt", g);
  const auto back = load_grid(dir / "g.cndt", Unit::kHu1000);
  CHECK(back.data == g.data);
  CHECK(back.height == 3);
  const auto c = random_complex(2, 5, 8);
  save_complex_grid(dir / "c.cndt", c);
  CHECK(load_complex_grid(dir / "c.cndt").data == c.data);
  CHECK(load_tensor(dir / "c.cndt").dtype == DType::kComplexF64);
}

TEST_CASE("pgm window mapping and file layout") {
  CHECK(window_to_byte(-0.16, -0.16, 0.24) == 0);
  CHECK(window_to_byte(0.24, -0.16, 0.24) == 255);
  CHECK(window_to_byte(1.0, 0.0, 4.0) == 64);
  CHECK(window_to_byte(-5.0, -0.16, 0.24) == 0);
  CHECK(window_to_byte(5.0, -0.16, 0.24) == 255);
  CHECK_THROWS_AS(window_to_byte(0.0, 1.0, 1.0), std::invalid_argument);
  const auto dir = testing::scratch_dir("pgm");
  Grid2D g(2, 3, std::vector<double>{0, 1, 2, 3, 4, 5});
  write_pgm(dir / "p.pgm", g, 0.0, 5.0);
  std::ifstream in(dir / "p.pgm", std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(contents.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(contents.size() == std::string("P5\n3 2\n255\n").size() + 6);
  CHECK(static_cast<unsigned char>(contents.back()) == 255);
}
