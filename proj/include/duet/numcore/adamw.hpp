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
#include <span>
#include <vector>

#include "duet/numcore/matrix.hpp"

namespace duet::num {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

// Moment buffers for a fixed, ordered list of parameters.
struct AdamWState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  // Zero-initialized buffers shaped like params.
  static AdamWState for_params(std::span<const Matrix* const> params, AdamWConfig config);

  friend bool operator==(const AdamWState&, const AdamWState&) = default;
};

// One decoupled-weight-decay Adam update with bias correction:
//   p <- p - lr * wd * p
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state);

}  // namespace duet::num
