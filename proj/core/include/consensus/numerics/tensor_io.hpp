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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "consensus/numerics/grid.hpp"

namespace consensus {

// CNDT layout (all little-endian):
//   "CNDT" | version:u8 = 1 | dtype:u8 | ndim:u8 | dims: ndim x u32 | payload
enum class DType : std::uint8_t { kF32 = 0, kF64 = 1, kComplexF32 = 2, kComplexF64 = 3 };

std::size_t dtype_size(DType dtype);

struct TensorRecord {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::kF64;
  std::vector<std::byte> payload;

  std::size_t element_count() const;
};

inline constexpr std::uint8_t kTensorFileVersion = 1;

/// Serializes a record into the CNDT byte layout.
std::vector<std::byte> encode_tensor(const TensorRecord& record);
/// Parses CNDT bytes. Throws IoError on bad magic, version, dtype, or length.
TensorRecord decode_tensor(std::span<const std::byte> bytes);

void save_tensor(const std::filesystem::path& path, const TensorRecord& record);
TensorRecord load_tensor(const std::filesystem::path& path);

// Typed helpers for the reference (f64) path.
TensorRecord make_f64_record(std::vector<std::uint32_t> dims, std::span<const double> values);
TensorRecord make_c64_record(std::vector<std::uint32_t> dims, std::span<const Complex> values);
/// Decodes f32 or f64 payloads into doubles.
std::vector<double> record_to_f64(const TensorRecord& record);
/// Decodes complex payloads (either width) into complex doubles.
std::vector<Complex> record_to_c64(const TensorRecord& record);

void save_grid(const std::filesystem::path& path, const Grid2D& grid);
Grid2D load_grid(const std::filesystem::path& path, Unit unit = Unit::kDimensionless);
void save_complex_grid(const std::filesystem::path& path, const ComplexGrid2D& grid);
ComplexGrid2D load_complex_grid(const std::filesystem::path& path);

}  // namespace consensus
