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


#include "duet/data/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "duet/errors.hpp"

namespace duet::data {

GenreTaxonomy::GenreTaxonomy(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  for (const auto& [name, originals] : rows) {
    const int id = static_cast<int>(class_names_.size());
    class_names_.push_back(name);
    for (const auto& o : originals) {
      if (!mapping_.emplace(o, id).second) {
        throw TaxonomyError("original label '" + o + "' is mapped to more than one class");
      }
      original_order_.push_back(o);
    }
  }
}

GenreTaxonomy GenreTaxonomy::audioset_genres() {
  return GenreTaxonomy({
      {"Country", {"Country"}},
      {"Classical", {"Classical music"}},
      {"Electronic", {"Electronic music"}},
      {"Non-Western",
       {"Middle Eastern music", "Music of Africa", "Music of Asia", "Music of Latin America",
        "Traditional music"}},
      {"Hip-Hop", {"Hip hop music"}},
      {"Jazz", {"Jazz"}},
      {"Pop", {"Pop music"}},
      {"Reggae", {"Reggae"}},
      {"R&B", {"Blues", "Disco", "Funk", "Rhythm and blues", "Soul music"}},
      {"Rock", {"Rock music"}},
      {"Vocal", {"Vocal music"}},
  });
}

GenreTaxonomy GenreTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaxonomyError("cannot open taxonomy file " + path.string());
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw TaxonomyError(path.string() + ":" + std::to_string(line_no) +
                          ": expected '<class>\\t<original label>'");
    }
    const std::string cls = line.substr(0, tab);
    const std::string original = line.substr(tab + 1);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.first == cls; });
    if (it == rows.end()) {
      rows.push_back({cls, {original}});
    } else {
      it->second.push_back(original);
    }
  }
  return GenreTaxonomy(rows);
}

void GenreTaxonomy::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TaxonomyError("cannot write taxonomy file " + path.string());
  out << "# condensed class\toriginal label\n";
  for (std::size_t c = 0; c < class_names_.size(); ++c)
    for (const auto& o : original_order_)
      if (mapping_.at(o) == static_cast<int>(c)) out << class_names_[c] << '\t' << o << '\n';
}

int GenreTaxonomy::class_of(const std::string& original_label) const {
  const auto it = mapping_.find(original_label);
  if (it == mapping_.end()) throw TaxonomyError("unknown label '" + original_label + "'");
  return it->second;
}

std::optional<int> GenreTaxonomy::class_id(const std::string& class_name) const {
  for (std::size_t i = 0; i < class_names_.size(); ++i)
    if (class_names_[i] == class_name) return static_cast<int>(i);
  return std::nullopt;
}

CondenseResult condense_labels(const std::vector<std::string>& original_labels,
                               const GenreTaxonomy& taxonomy) {
  std::set<std::string> distinct;
  for (const auto& l : original_labels) {
    taxonomy.class_of(l);
    distinct.insert(l);
  }
  if (distinct.empty()) return {CondenseStatus::kRejectedNoLabel, -1};
  if (distinct.size() > 1) return {CondenseStatus::kRejectedMultiLabel, -1};
  return {CondenseStatus::kAccepted, taxonomy.class_of(*distinct.begin())};
}

}  // namespace duet::data
