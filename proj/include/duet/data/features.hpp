// Copyright 2026 The Duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "duet/numcore/matrix.hpp"

namespace duet::data {

// Feature file layout (all integers little-endian):
//   offset 0   8 bytes  magic "DUETFEAT"
//   offset 8   u32      format version (1)
//   offset 12  u32      reserved, 0
//   offset 16  u64      row count
//   offset 24  u64      column count
//   offset 32  rows*cols IEEE-754 binary32 values, row-major
inline constexpr char kFeatureMagic[8] = {'D', 'U', 'E', 'T', 'F', 'E', 'A', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 32;

struct FeatureArray {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> values;

  num::Matrix to_matrix() const;
  static FeatureArray from_matrix(const num::Matrix& m);
  friend bool operator==(const FeatureArray&, const FeatureArray&) = default;
};

void write_features(const std::filesystem::path& path, const FeatureArray& features);

// Throws FormatError (with the byte offset) on a bad magic, version or
// truncation, and DimensionConflictError when expected_cols is given and
// differs from the header.
FeatureArray read_features(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_cols = std::nullopt);

}  // namespace duet::data
