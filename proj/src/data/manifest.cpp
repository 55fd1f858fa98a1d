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


#include "duet/data/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "duet/data/features.hpp"
#include "duet/errors.hpp"

namespace duet::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "duet-manifest";
constexpr int kVersion = 1;

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val" || s == "validation") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(s) + "' (expected train, val or test)");
}

std::array<std::size_t, 3> DatasetManifest::split_counts() const {
  std::array<std::size_t, 3> c{};
  for (const auto& it : items) ++c[static_cast<std::size_t>(it.split)];
  return c;
}

std::vector<std::size_t> DatasetManifest::indices_of(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].split == s) out.push_back(i);
  return out;
}

void DatasetManifest::validate() const {
  std::set<std::string> ids;
  std::set<std::uint64_t> rows;
  for (const auto& it : items) {
    if (!ids.insert(it.id).second) throw FormatError("duplicate item id '" + it.id + "'");
    if (!rows.insert(it.row).second) {
      throw FormatError("feature row " + std::to_string(it.row) + " used by more than one item");
    }
    if (it.genre < 0 || static_cast<std::size_t>(it.genre) >= header.class_names.size()) {
      throw FormatError("item '" + it.id + "' has genre " + std::to_string(it.genre) +
                        " outside the " + std::to_string(header.class_names.size()) + " classes");
    }
  }
}

std::string serialize_manifest(const DatasetManifest& m) {
  const auto counts = m.split_counts();
  json header = {{"format", kFormat},
                 {"version", kVersion},
                 {"audio_dim", m.header.audio_dim},
                 {"audio_layers", m.header.audio_layers},
                 {"video_dim", m.header.video_dim},
                 {"class_names", m.header.class_names},
                 {"audio_features", m.header.audio_features},
                 {"video_features", m.header.video_features},
                 {"item_count", m.items.size()},
                 {"split_counts", {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}}}};
  std::string out = header.dump();
  out += '\n';
  for (const auto& it : m.items) {
    json rec = {{"id", it.id}, {"genre", it.genre}, {"split", to_string(it.split)}, {"row", it.row}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const std::string& source) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t declared = 0;
  auto fail = [&](const std::string& what) -> void {
    throw FormatError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != kFormat) fail("not a duet manifest header");
        if (j.at("version").get<int>() != kVersion) fail("unsupported manifest version");
        j.at("audio_dim").get_to(m.header.audio_dim);
        j.at("audio_layers").get_to(m.header.audio_layers);
        j.at("video_dim").get_to(m.header.video_dim);
        j.at("class_names").get_to(m.header.class_names);
        j.at("audio_features").get_to(m.header.audio_features);
        j.at("video_features").get_to(m.header.video_features);
        j.at("item_count").get_to(declared);
        have_header = true;
        continue;
      }
      MusicVideoItem it;
      j.at("id").get_to(it.id);
      j.at("genre").get_to(it.genre);
      it.split = parse_split(j.at("split").get<std::string>());
      j.at("row").get_to(it.row);
      m.items.push_back(std::move(it));
    } catch (const json::exception& e) {
      fail(e.what());
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  if (!have_header) throw FormatError(source + ": missing manifest header");
  if (declared != m.items.size()) {
    throw FormatError(source + ": header declares " + std::to_string(declared) + " items but " +
                      std::to_string(m.items.size()) + " records follow");
  }
  m.validate();
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << serialize_manifest(m);
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

Dataset load_dataset(const fs::path& manifest_or_dir) {
  const fs::path manifest_path =
      fs::is_directory(manifest_or_dir) ? manifest_or_dir / kManifestFile : manifest_or_dir;
  Dataset d;
  d.manifest = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  const auto& h = d.manifest.header;
  const FeatureArray audio = read_features(dir / h.audio_features, h.audio_cols());
  const FeatureArray video = read_features(dir / h.video_features, h.video_dim);
  if (audio.rows != video.rows) {
    throw DimensionConflictError("audio features have " + std::to_string(audio.rows) +
                                 " rows but video features have " + std::to_string(video.rows));
  }
  for (const auto& it : d.manifest.items) {
    if (it.row >= audio.rows) {
      throw DimensionConflictError("item '" + it.id + "' references feature row " +
                                   std::to_string(it.row) + " of " + std::to_string(audio.rows));
    }
  }
  d.audio = audio.to_matrix();
  d.video = video.to_matrix();
  return d;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  const auto& h = dataset.manifest.header;
  if (dataset.audio.cols() != h.audio_cols() || dataset.video.cols() != h.video_dim) {
    throw DimensionConflictError("feature matrices do not match the manifest header dims");
  }
  write_features(dir / h.audio_features, FeatureArray::from_matrix(dataset.audio));
  write_features(dir / h.video_features, FeatureArray::from_matrix(dataset.video));
  write_manifest(dir / kManifestFile, dataset.manifest);
}

}  // namespace duet::data
