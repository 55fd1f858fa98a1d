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


#include "duet/data/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "duet/errors.hpp"
#include "duet/numcore/random.hpp"

namespace duet::data {

using num::Matrix;

void SyntheticConfig::validate() const {
  if (num_classes == 0 || items_per_class == 0) throw ConfigError("synthetic dataset is empty");
  if (audio_dim == 0 || video_dim == 0 || pair_latent_dim == 0 || class_latent_dim == 0) {
    throw ConfigError("synthetic dimensions must be positive");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (!(class_sep >= 0.0)) throw ConfigError("class separation must be non-negative");
  if (!(noise >= 0.0)) throw ConfigError("noise level must be non-negative");
}

void to_json(nlohmann::json& j, const SyntheticConfig& c) {
  j = nlohmann::json{{"num_classes", c.num_classes},
                     {"items_per_class", c.items_per_class},
                     {"audio_dim", c.audio_dim},
                     {"video_dim", c.video_dim},
                     {"rho", c.rho},
                     {"class_sep", c.class_sep},
                     {"noise", c.noise},
                     {"pair_latent_dim", c.pair_latent_dim},
                     {"class_latent_dim", c.class_latent_dim},
                     {"independent_class_centers", c.independent_class_centers},
                     {"audio_layers", c.audio_layers},
                     {"fractions", {c.fractions.train, c.fractions.val, c.fractions.test}},
                     {"seed", c.seed}};
}

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, num::Rng& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

// y += P x, with P stored out_dim x in_dim.
void add_projection(std::span<double> y, const Matrix& p, std::span<const double> x, double scale) {
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) s += p(r, c) * x[c];
    y[r] += scale * s;
  }
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  num::Rng structure = num::derive_rng(config.seed, "synthetic.structure");
  num::Rng items = num::derive_rng(config.seed, "synthetic.items");

  const std::size_t k = config.pair_latent_dim;
  const std::size_t kc = config.class_latent_dim;
  const Matrix pair_audio = gaussian(config.audio_dim, k, 1.0 / std::sqrt(double(k)), structure);
  const Matrix pair_video = gaussian(config.video_dim, k, 1.0 / std::sqrt(double(k)), structure);
  const Matrix class_audio = gaussian(config.audio_dim, kc, 1.0 / std::sqrt(double(kc)), structure);
  const Matrix class_video = gaussian(config.video_dim, kc, 1.0 / std::sqrt(double(kc)), structure);
  const Matrix centers_audio = gaussian(config.num_classes, kc, 1.0, structure);
  const Matrix centers_video =
      config.independent_class_centers ? gaussian(config.num_classes, kc, 1.0, structure) : centers_audio;

  const std::size_t n = config.num_classes * config.items_per_class;
  const std::size_t layers = config.audio_layers;
  Matrix audio(n, layers == 0 ? config.audio_dim : config.audio_dim * layers);
  Matrix video(n, config.video_dim);

  std::normal_distribution<double> std_normal(0.0, 1.0);
  const double private_scale = std::sqrt(std::max(0.0, 1.0 - config.rho * config.rho));
  std::vector<double> s(k), t(k), lv(k), xa(config.audio_dim);

  DatasetManifest manifest;
  manifest.header.audio_dim = config.audio_dim;
  manifest.header.audio_layers = layers;
  manifest.header.video_dim = config.video_dim;
  for (std::size_t c = 0; c < config.num_classes; ++c)
    manifest.header.class_names.push_back("class_" + std::to_string(c));

  // Items are emitted class-major; ids are zero-padded so lexical order
  // matches row order.
  std::size_t row = 0;
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    for (std::size_t i = 0; i < config.items_per_class; ++i, ++row) {
      for (auto& v : s) v = std_normal(items);
      for (auto& v : t) v = std_normal(items);
      for (std::size_t j = 0; j < k; ++j) lv[j] = config.rho * s[j] + private_scale * t[j];

      std::fill(xa.begin(), xa.end(), 0.0);
      add_projection(xa, pair_audio, s, 1.0);
      add_projection(xa, class_audio, centers_audio.row(c), config.class_sep);
      for (auto& v : xa) v += config.noise * std_normal(items);

      auto xv = video.row(row);
      add_projection(xv, pair_video, lv, 1.0);
      add_projection(xv, class_video, centers_video.row(c), config.class_sep);
      for (auto& v : xv) v += config.noise * std_normal(items);

      auto dst = audio.row(row);
      if (layers == 0) {
        std::copy(xa.begin(), xa.end(), dst.begin());
      } else {
        for (std::size_t l = 0; l < layers; ++l) {
          const double extra =
              layers == 1 ? 0.0 : config.noise * static_cast<double>(l) / double(layers - 1);
          for (std::size_t d = 0; d < config.audio_dim; ++d)
            dst[l * config.audio_dim + d] = xa[d] + extra * std_normal(items);
        }
      }

      char id[32];
      std::snprintf(id, sizeof id, "syn-%06zu", row);
      manifest.items.push_back(MusicVideoItem{id, static_cast<int>(c), Split::kTrain, row});
    }
  }

  for (auto& v : audio.data()) v = static_cast<double>(static_cast<float>(v));
  for (auto& v : video.data()) v = static_cast<double>(static_cast<float>(v));

  SplitResult split = stratified_split(std::move(manifest), config.fractions, config.seed);
  return Dataset{std::move(split.manifest), std::move(audio), std::move(video)};
}

}  // namespace duet::data
