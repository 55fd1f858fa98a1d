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

#include <nlohmann/json.hpp>

#include "duet/data/manifest.hpp"
#include "duet/data/sampling.hpp"

namespace duet::data {

// Generative model of one synthetic music-video pair of class c:
//
//   s ~ N(0, I_k), t ~ N(0, I_k)          pair-identity latents
//   l_audio = s
//   l_video = rho * s + sqrt(1 - rho^2) * t
//   x_m = P_m l_m + class_sep * C_m mu_c^m + noise * e_m,   e_m ~ N(0, I)
//
// P_m and C_m are fixed random projections scaled to unit variance per
// output coordinate. Each class draws a center pair (mu_c^audio, mu_c^video)
// ~ N(0, I_kc); by default both modalities share one draw, and with
// independent_class_centers matching classes across modalities is no longer
// a linear function of the features. rho sets how identifiable the specific pair is and
// class_sep sets how identifiable the class is.
struct SyntheticConfig {
  std::size_t num_classes = 8;
  std::size_t items_per_class = 250;
  std::size_t audio_dim = 64;
  std::size_t video_dim = 32;
  double rho = 0.9;
  double class_sep = 1.0;
  double noise = 0.5;
  std::size_t pair_latent_dim = 16;
  std::size_t class_latent_dim = 2;
  bool independent_class_centers = false;
  // When > 0, audio is emitted as this many stacked layers of audio_dim
  // columns; layer l adds noise of scale l / (layers - 1) * noise on top of x_audio.
  std::size_t audio_layers = 0;
  SplitFractions fractions;
  std::uint64_t seed = 7;

  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticConfig& c);

// Feature values are rounded to binary32 so an in-memory dataset and its
// saved-then-loaded copy are identical.
Dataset generate_synthetic(const SyntheticConfig& config);

}  // namespace duet::data
