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
#include <string>
#include <vector>

#include "duet/data/manifest.hpp"
#include "duet/numcore/ops.hpp"

namespace duet::data {

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitResult {
  DatasetManifest manifest;
  // One message per class with fewer items than there are splits.
  std::vector<std::string> warnings;
};

// Assigns every item a split so that each class is divided according to the
// fractions: per class, counts are floored and the remainder goes to the
// splits with the largest fractional parts (ties: train, val, test). Items
// within a class are shuffled with the seed before assignment. Item order
// and everything except `split` are preserved.
SplitResult stratified_split(DatasetManifest manifest, const SplitFractions& fractions,
                             std::uint64_t seed);

// Two-stage class-balanced sampler: a uniform class draw, then a uniform
// item draw within that class. Draws are with replacement.
class BalancedSampler {
 public:
  BalancedSampler(const DatasetManifest& manifest, Split split);

  // Indices into manifest.items.
  std::vector<std::size_t> next_batch(std::size_t batch_size, num::Rng& rng) const;
  std::size_t split_size() const noexcept { return split_size_; }
  // ceil(split size / batch size)
  std::size_t batches_per_epoch(std::size_t batch_size) const;

 private:
  std::vector<std::vector<std::size_t>> by_class_;
  std::size_t split_size_ = 0;
};

std::vector<std::string> balanced_batch(const DatasetManifest& manifest, Split split,
                                        std::size_t batch_size, num::Rng& rng);

}  // namespace duet::data
