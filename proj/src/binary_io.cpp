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

#include "alttrip/binary_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "alttrip/hash.hpp"

namespace alttrip {
namespace {

constexpr std::size_t kMagicSize = 8;

std::string padded_magic(std::string_view magic) {
  std::string m(magic.substr(0, kMagicSize));
  m.resize(kMagicSize, '\0');
  return m;
}

std::uint64_t checksum(std::string_view bytes) {
  Fnv1a h;
  h.update(std::as_bytes(std::span(bytes.data(), bytes.size())));
  return h.digest();
}

}  // namespace

BinaryWriter::BinaryWriter(std::string_view magic, std::uint32_t version)
    : buf_(padded_magic(magic)) {
  u32(version);
}

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  raw(s.data(), s.size());
}

void BinaryWriter::doubles(std::span<const double> values) {
  u64(values.size());
  raw(values.data(), values.size_bytes());
}

void BinaryWriter::ints(std::span<const int> values) {
  u64(values.size());
  for (int v : values) i64(v);
}

void BinaryWriter::matrix(const Matrix& m) {
  u64(m.rows());
  u64(m.cols());
  raw(m.values().data(), m.values().size_bytes());
}

std::string BinaryWriter::finish() {
  std::string out = buf_;
  const std::uint64_t sum = checksum(out);
  out.append(reinterpret_cast<const char*>(&sum), sizeof sum);
  return out;
}

void BinaryWriter::write_file(const std::filesystem::path& file) {
  const std::string bytes = finish();
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIoError, "cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::kIoError, "short write to " + file.string());
}

BinaryReader::BinaryReader(std::string data, std::string_view magic, std::uint32_t max_version)
    : data_(std::move(data)) {
  if (data_.size() < kMagicSize + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
    fail(Errc::kCorruptFile, "checkpoint is truncated");
  }
  if (data_.compare(0, kMagicSize, padded_magic(magic)) != 0) {
    fail(Errc::kCorruptFile, "checkpoint has the wrong magic (expected " + std::string(magic) + ")");
  }
  end_ = data_.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, data_.data() + end_, sizeof stored);
  if (stored != checksum(std::string_view(data_).substr(0, end_))) {
    fail(Errc::kCorruptFile, "checkpoint checksum mismatch");
  }
  pos_ = kMagicSize;
  version_ = u32();
  if (version_ == 0 || version_ > max_version) {
    fail(Errc::kVersionMismatch, "unsupported checkpoint version " + std::to_string(version_));
  }
}

BinaryReader BinaryReader::from_file(const std::filesystem::path& file, std::string_view magic,
                                     std::uint32_t max_version) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(Errc::kIoError, "cannot open " + file.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return BinaryReader(std::move(bytes), magic, max_version);
}

void BinaryReader::need(std::size_t n) const {
  if (n > end_ - pos_) fail(Errc::kCorruptFile, "checkpoint payload is truncated");
}

std::string BinaryReader::str() {
  const auto n = u64();
  need(n);
  std::string s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::vector<double> BinaryReader::doubles() {
  const auto n = u64();
  if (n > std::numeric_limits<std::size_t>::max() / sizeof(double)) {
    fail(Errc::kCorruptFile, "bad array length");
  }
  need(n * sizeof(double));
  std::vector<double> out(n);
  std::memcpy(out.data(), data_.data() + pos_, n * sizeof(double));
  pos_ += n * sizeof(double);
  return out;
}

std::vector<int> BinaryReader::ints() {
  const auto n = u64();
  need(n * sizeof(std::int64_t));
  std::vector<int> out(n);
  for (auto& v : out) v = static_cast<int>(i64());
  return out;
}

Matrix BinaryReader::matrix() {
  const auto rows = u64();
  const auto cols = u64();
  if (cols != 0 && rows > (end_ - pos_) / sizeof(double) / cols) {
    fail(Errc::kCorruptFile, "bad matrix shape");
  }
  Matrix m(rows, cols);
  need(m.values().size_bytes());
  std::memcpy(m.values().data(), data_.data() + pos_, m.values().size_bytes());
  pos_ += m.values().size_bytes();
  return m;
}

}  // namespace alttrip
