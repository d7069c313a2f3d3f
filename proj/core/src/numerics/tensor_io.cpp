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

#include "consensus/numerics/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "consensus/numerics/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "CNDT payloads are written in host order; big-endian hosts need byte swapping");

namespace consensus {
namespace {

constexpr char kMagic[4] = {'C', 'N', 'D', 'T'};
constexpr std::size_t kFixedHeader = 7;

template <typename T>
std::vector<std::byte> to_bytes(std::span<const T> values) {
  std::vector<std::byte> out(values.size_bytes());
  if (!out.empty()) std::memcpy(out.data(), values.data(), out.size());
  return out;
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kF32:
      return 4;
    case DType::kF64:
      return 8;
    case DType::kComplexF32:
      return 8;
    case DType::kComplexF64:
      return 16;
  }
  throw IoError("unknown dtype code");
}

std::size_t TensorRecord::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::byte> encode_tensor(const TensorRecord& record) {
  if (record.dims.empty()) throw IoError("CNDT: ndim must be >= 1");
  if (record.dims.size() > 255) throw IoError("CNDT: ndim exceeds 255");
  if (record.payload.size() != record.element_count() * dtype_size(record.dtype)) {
    throw IoError("CNDT: payload length does not match dims and dtype");
  }
  std::vector<std::byte> out;
  out.reserve(kFixedHeader + 4 * record.dims.size() + record.payload.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(kTensorFileVersion));
  out.push_back(static_cast<std::byte>(record.dtype));
  out.push_back(static_cast<std::byte>(record.dims.size()));
  for (std::uint32_t d : record.dims) {
    for (int shift = 0; shift < 32; shift += 8) {
      out.push_back(static_cast<std::byte>((d >> shift) & 0xffu));
    }
  }
  out.insert(out.end(), record.payload.begin(), record.payload.end());
  return out;
}

TensorRecord decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("CNDT: bad magic");
  }
  if (bytes.size() < kFixedHeader) throw IoError("CNDT: truncated header");
  const auto version = static_cast<std::uint8_t>(bytes[4]);
  if (version != kTensorFileVersion) {
    throw IoError("CNDT: unsupported version " + std::to_string(version));
  }
  const auto code = static_cast<std::uint8_t>(bytes[5]);
  if (code > 3) throw IoError("CNDT: unknown dtype code " + std::to_string(code));
  const auto ndim = static_cast<std::size_t>(bytes[6]);
  if (ndim == 0) throw IoError("CNDT: ndim must be >= 1");
  if (bytes.size() < kFixedHeader + 4 * ndim) throw IoError("CNDT: truncated header");

  TensorRecord record;
  record.dtype = static_cast<DType>(code);
  record.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    std::uint32_t d = 0;
    for (int b = 0; b < 4; ++b) {
      d |= static_cast<std::uint32_t>(bytes[kFixedHeader + 4 * i + b]) << (8 * b);
    }
    record.dims[i] = d;
  }
  const std::size_t offset = kFixedHeader + 4 * ndim;
  const std::size_t expected = record.element_count() * dtype_size(record.dtype);
  if (bytes.size() - offset < expected) throw IoError("CNDT: truncated payload");
  if (bytes.size() - offset > expected) throw IoError("CNDT: trailing bytes after payload");
  record.payload.assign(bytes.begin() + offset, bytes.end());
  return record;
}

void save_tensor(const std::filesystem::path& path, const TensorRecord& record) {
  const auto bytes = encode_tensor(record);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TensorRecord load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* begin = reinterpret_cast<const std::byte*>(raw.data());
  try {
    return decode_tensor(std::span<const std::byte>(begin, raw.size()));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

TensorRecord make_f64_record(std::vector<std::uint32_t> dims, std::span<const double> values) {
  TensorRecord record{std::move(dims), DType::kF64, to_bytes(values)};
  if (record.element_count() != values.size()) {
    throw IoError("CNDT: value count does not match dims");
  }
  return record;
}

TensorRecord make_c64_record(std::vector<std::uint32_t> dims, std::span<const Complex> values) {
  TensorRecord record{std::move(dims), DType::kComplexF64, to_bytes(values)};
  if (record.element_count() != values.size()) {
    throw IoError("CNDT: value count does not match dims");
  }
  return record;
}

std::vector<double> record_to_f64(const TensorRecord& record) {
  const std::size_t n = record.element_count();
  std::vector<double> out(n);
  if (record.dtype == DType::kF64) {
    std::memcpy(out.data(), record.payload.data(), n * 8);
  } else if (record.dtype == DType::kF32) {
    std::vector<float> tmp(n);
    std::memcpy(tmp.data(), record.payload.data(), n * 4);
    for (std::size_t i = 0; i < n; ++i) out[i] = tmp[i];
  } else {
    throw IoError("CNDT: expected a real dtype");
  }
  return out;
}

std::vector<Complex> record_to_c64(const TensorRecord& record) {
  const std::size_t n = record.element_count();
  std::vector<Complex> out(n);
  if (record.dtype == DType::kComplexF64) {
    std::memcpy(out.data(), record.payload.data(), n * 16);
  } else if (record.dtype == DType::kComplexF32) {
    std::vector<float> tmp(2 * n);
    std::memcpy(tmp.data(), record.payload.data(), n * 8);
    for (std::size_t i = 0; i < n; ++i) out[i] = Complex(tmp[2 * i], tmp[2 * i + 1]);
  } else {
    throw IoError("CNDT: expected a complex dtype");
  }
  return out;
}

void save_grid(const std::filesystem::path& path, const Grid2D& grid) {
  save_tensor(path, make_f64_record({static_cast<std::uint32_t>(grid.height),
                                     static_cast<std::uint32_t>(grid.width)},
                                    grid.data));
}

Grid2D load_grid(const std::filesystem::path& path, Unit unit) {
  const auto record = load_tensor(path);
  if (record.dims.size() != 2) throw IoError(path.string() + ": expected a 2-D tensor");
  return Grid2D(record.dims[0], record.dims[1], record_to_f64(record), unit);
}

void save_complex_grid(const std::filesystem::path& path, const ComplexGrid2D& grid) {
  save_tensor(path, make_c64_record({static_cast<std::uint32_t>(grid.height),
                                     static_cast<std::uint32_t>(grid.width)},
                                    grid.data));
}

ComplexGrid2D load_complex_grid(const std::filesystem::path& path) {
  const auto record = load_tensor(path);
  if (record.dims.size() != 2) throw IoError(path.string() + ": expected a 2-D tensor");
  ComplexGrid2D grid(record.dims[0], record.dims[1]);
  grid.data = record_to_c64(record);
  return grid;
}

}  // namespace consensus
