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

#include "alttrip/hash.hpp"

#include <cstdio>
#include <cstring>

namespace alttrip {

void Fnv1a::update(std::span<const std::byte> bytes) {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update(std::string_view text) {
  update(std::as_bytes(std::span(text.data(), text.size())));
  // Length terminator so ("ab","c") and ("a","bc") differ.
  update(static_cast<std::int64_t>(text.size()));
}

void Fnv1a::update(double value) {
  update(std::as_bytes(std::span(&value, 1)));
}

void Fnv1a::update(std::int64_t value) {
  update(std::as_bytes(std::span(&value, 1)));
}

void Fnv1a::update(std::span<const double> values) {
  update(std::as_bytes(values));
}

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace alttrip
