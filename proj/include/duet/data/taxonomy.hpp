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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace duet::data {

// Maps fine-grained source labels onto a small set of condensed classes.
class GenreTaxonomy {
 public:
  GenreTaxonomy() = default;
  // rows: (condensed class name, original labels mapped onto it), in class-id order.
  explicit GenreTaxonomy(
      const std::vector<std::pair<std::string, std::vector<std::string>>>& rows);

  // The built-in 11-class music genre taxonomy over AudioSet genre labels.
  static GenreTaxonomy audioset_genres();
  // Reads a tab-separated file of "<condensed class>\t<original label>" lines.
  // Blank lines and lines starting with '#' are ignored. Classes are numbered
  // in order of first appearance.
  static GenreTaxonomy load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t num_classes() const noexcept { return class_names_.size(); }
  const std::map<std::string, int>& mapping() const noexcept { return mapping_; }

  // Condensed class of one original label; throws TaxonomyError if unknown.
  int class_of(const std::string& original_label) const;
  std::optional<int> class_id(const std::string& class_name) const;

 private:
  std::vector<std::string> class_names_;
  std::map<std::string, int> mapping_;
  std::vector<std::string> original_order_;
};

enum class CondenseStatus { kAccepted, kRejectedMultiLabel, kRejectedNoLabel };

struct CondenseResult {
  CondenseStatus status = CondenseStatus::kRejectedNoLabel;
  int class_id = -1;
};

// Accepts items that carry exactly one label of the taxonomy. Every label
// must be known to the taxonomy.
CondenseResult condense_labels(const std::vector<std::string>& original_labels,
                               const GenreTaxonomy& taxonomy);

}  // namespace duet::data
