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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace alttrip {

// 64-bit FNV-1a. Used for content fingerprints, not for security.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  void update(double value);
  void update(std::int64_t value);
  void update(std::span<const double> values);

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex_digest(std::uint64_t digest);

}  // namespace alttrip
