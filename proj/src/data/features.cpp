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


#include "duet/data/features.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "duet/errors.hpp"

namespace duet::data {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

[[noreturn]] void format_error(const std::filesystem::path& path, std::size_t offset,
                               const std::string& what) {
  throw FormatError(path.string() + " at byte " + std::to_string(offset) + ": " + what);
}

}  // namespace

num::Matrix FeatureArray::to_matrix() const {
  num::Matrix m(rows, cols);
  for (std::size_t i = 0; i < values.size(); ++i) m[i] = static_cast<double>(values[i]);
  return m;
}

FeatureArray FeatureArray::from_matrix(const num::Matrix& m) {
  FeatureArray f{m.rows(), m.cols(), std::vector<float>(m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) f.values[i] = static_cast<float>(m[i]);
  return f;
}

void write_features(const std::filesystem::path& path, const FeatureArray& features) {
  if (features.values.size() != features.rows * features.cols) {
    throw ShapeError("feature array holds " + std::to_string(features.values.size()) +
                     " values for " + num::shape_string(features.rows, features.cols));
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(kFeatureHeaderBytes + 4 * features.values.size());
  bytes.insert(bytes.end(), std::begin(kFeatureMagic), std::end(kFeatureMagic));
  put_u32(bytes, kFeatureVersion);
  put_u32(bytes, 0);
  put_u64(bytes, features.rows);
  put_u64(bytes, features.cols);
  for (float f : features.values) put_u32(bytes, std::bit_cast<std::uint32_t>(f));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

FeatureArray read_features(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < kFeatureHeaderBytes) {
    format_error(path, bytes.size(), "truncated header (" + std::to_string(bytes.size()) + " of " +
                                         std::to_string(kFeatureHeaderBytes) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, sizeof kFeatureMagic) != 0) {
    format_error(path, 0, "bad magic number");
  }
  const std::uint32_t version = get_u32(bytes.data() + 8);
  if (version != kFeatureVersion) {
    format_error(path, 8, "unsupported version " + std::to_string(version));
  }
  FeatureArray f;
  f.rows = get_u64(bytes.data() + 16);
  f.cols = get_u64(bytes.data() + 24);
  if (expected_cols && *expected_cols != f.cols) {
    throw DimensionConflictError(path.string() + " at byte 24: header declares " +
                                 std::to_string(f.cols) + " columns but " +
                                 std::to_string(*expected_cols) + " were expected");
  }
  const std::uint64_t count = f.rows * f.cols;
  if (f.cols != 0 && count / f.cols != f.rows) format_error(path, 16, "row/column count overflow");
  const std::uint64_t need = kFeatureHeaderBytes + 4 * count;
  if (bytes.size() < need) {
    format_error(path, bytes.size(),
                 "truncated payload (expected " + std::to_string(need) + " bytes)");
  }
  if (bytes.size() > need) format_error(path, need, "trailing bytes after payload");
  f.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    f.values[i] = std::bit_cast<float>(get_u32(bytes.data() + kFeatureHeaderBytes + 4 * i));
  }
  return f;
}

}  // namespace duet::data
