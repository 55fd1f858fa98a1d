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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "duet/numcore/matrix.hpp"

namespace duet::data {

enum class Split { kTrain, kVal, kTest };
inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kVal, Split::kTest};

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct MusicVideoItem {
  std::string id;
  int genre = 0;
  Split split = Split::kTrain;
  // Row of this item in the audio and video feature files.
  std::uint64_t row = 0;
  friend bool operator==(const MusicVideoItem&, const MusicVideoItem&) = default;
};

struct DatasetHeader {
  // Per-layer audio width; files hold audio_layers * audio_dim columns when
  // audio_layers > 0.
  std::uint64_t audio_dim = 0;
  std::uint64_t audio_layers = 0;
  std::uint64_t video_dim = 0;
  std::vector<std::string> class_names;
  std::string audio_features = "audio.f32";
  std::string video_features = "video.f32";

  std::uint64_t audio_cols() const { return audio_layers == 0 ? audio_dim : audio_dim * audio_layers; }
  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct DatasetManifest {
  DatasetHeader header;
  std::vector<MusicVideoItem> items;

  std::array<std::size_t, 3> split_counts() const;
  std::vector<std::size_t> indices_of(Split s) const;
  std::size_t num_classes() const { return header.class_names.size(); }
  // Checks ids are unique, genres in range and rows distinct.
  void validate() const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Line-delimited JSON: the first line is the header document, every further
// line is one item record. Keys are emitted in sorted order so a loaded
// manifest re-serializes to identical bytes.
std::string serialize_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(std::string_view text, const std::string& source = "<memory>");
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestFile = "manifest.jsonl";

// A manifest together with its feature matrices, rows aligned with
// MusicVideoItem::row.
struct Dataset {
  DatasetManifest manifest;
  num::Matrix audio;
  num::Matrix video;
};

// Accepts either a manifest path or a directory containing manifest.jsonl;
// feature paths are resolved relative to the manifest.
Dataset load_dataset(const std::filesystem::path& manifest_or_dir);
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

}  // namespace duet::data
