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


#include "duet/data/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "duet/errors.hpp"

namespace duet::data {

SplitResult stratified_split(DatasetManifest manifest, const SplitFractions& fractions,
                             std::uint64_t seed) {
  const std::array<double, 3> f = {fractions.train, fractions.val, fractions.test};
  for (double x : f)
    if (!(x >= 0.0)) throw ConfigError("split fractions must be non-negative");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }

  SplitResult result;
  num::Rng rng(seed);
  const std::size_t classes = manifest.num_classes();
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < manifest.items.size(); ++i)
      if (manifest.items[i].genre == static_cast<int>(c)) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < kAllSplits.size()) {
      result.warnings.push_back("class '" + manifest.header.class_names[c] + "' has only " +
                                std::to_string(members.size()) +
                                " items; some splits receive none");
    }
    std::shuffle(members.begin(), members.end(), rng);

    const double n = static_cast<double>(members.size());
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double ideal = f[k] * n;
      counts[k] = static_cast<std::size_t>(std::floor(ideal));
      frac[k] = ideal - std::floor(ideal);
      assigned += counts[k];
    }
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned) ++counts[order[r % 3]];

    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < counts[k]; ++j) manifest.items[members[pos++]].split = kAllSplits[k];
  }
  result.manifest = std::move(manifest);
  return result;
}

BalancedSampler::BalancedSampler(const DatasetManifest& manifest, Split split)
    : by_class_(manifest.num_classes()) {
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    const auto& it = manifest.items[i];
    if (it.split != split) continue;
    by_class_.at(static_cast<std::size_t>(it.genre)).push_back(i);
    ++split_size_;
  }
  if (split_size_ == 0) {
    throw SamplingError("split '" + std::string(to_string(split)) + "' is empty");
  }
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    if (by_class_[c].empty()) {
      throw SamplingError("class '" + manifest.header.class_names[c] + "' has no items in split '" +
                          std::string(to_string(split)) + "'");
    }
  }
}

std::vector<std::size_t> BalancedSampler::next_batch(std::size_t batch_size, num::Rng& rng) const {
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  std::uniform_int_distribution<std::size_t> pick_class(0, by_class_.size() - 1);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto& members = by_class_[pick_class(rng)];
    std::uniform_int_distribution<std::size_t> pick_item(0, members.size() - 1);
    out.push_back(members[pick_item(rng)]);
  }
  return out;
}

std::size_t BalancedSampler::batches_per_epoch(std::size_t batch_size) const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  return (split_size_ + batch_size - 1) / batch_size;
}

std::vector<std::string> balanced_batch(const DatasetManifest& manifest, Split split,
                                        std::size_t batch_size, num::Rng& rng) {
  const BalancedSampler sampler(manifest, split);
  std::vector<std::string> ids;
  for (std::size_t i : sampler.next_batch(batch_size, rng)) ids.push_back(manifest.items[i].id);
  return ids;
}

}  // namespace duet::data
