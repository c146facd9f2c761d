/*
 * Copyright 2026 The alttrip Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Little-endian checkpoint containers.
//
// Layout: 8-byte magic, u32 format version, payload, u64 FNV-1a checksum of
// everything before it. Readers fail with CorruptFile on any truncation or
// checksum mismatch and VersionMismatch on an unknown version.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alttrip/error.hpp"
#include "alttrip/kernels.hpp"

namespace alttrip {

class BinaryWriter {
 public:
  BinaryWriter(std::string_view magic, std::uint32_t version);

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s);
  void doubles(std::span<const double> values);
  void ints(std::span<const int> values);
  void matrix(const Matrix& m);

  // Appends the checksum and returns the finished container.
  std::string finish();
  void write_file(const std::filesystem::path& file);

 private:
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class BinaryReader {
 public:
  // Verifies magic, checksum and that the version is in [1, max_version].
  BinaryReader(std::string data, std::string_view magic, std::uint32_t max_version);
  static BinaryReader from_file(const std::filesystem::path& file, std::string_view magic,
                                std::uint32_t max_version);

  std::uint32_t version() const { return version_; }

  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int64_t i64() { return pod<std::int64_t>(); }
  double f64() { return pod<double>(); }
  std::string str();
  std::vector<double> doubles();
  std::vector<int> ints();
  Matrix matrix();

  bool at_end() const { return pos_ == end_; }

 private:
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const;

  std::string data_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::uint32_t version_ = 0;
};

}  // namespace alttrip
