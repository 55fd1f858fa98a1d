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

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "duet/model/model.hpp"
#include "duet/numcore/tape.hpp"

namespace duet::loss {

using num::Matrix;
using num::Var;

enum class Direction { kAudioToVideo, kVideoToAudio };

// Cross-modal InfoNCE for one direction: row i of the anchor modality
// against every row of the other modality, with row i as the only positive.
//   -1/N sum_i log softmax_k(s_ik / tau)[i],  s = anchor . other^T
Var infonce_directional(const Var& audio, const Var& video, Direction direction,
                        double temperature);

// Cross-modal SupCon for one direction. Positives of anchor i are all
// candidates p with labels[p] == labels[i] (including p = i); the softmax
// denominator runs over the whole batch.
Var supcon_directional(const Var& audio, const Var& video, std::span<const int> labels,
                       Direction direction, double temperature);

// General form with separate anchor and candidate labels. Anchors without a
// positive are skipped and counted; the mean runs over contributing anchors.
Var supcon(const Var& anchors, const Var& candidates, std::span<const int> anchor_labels,
           std::span<const int> candidate_labels, double temperature,
           std::size_t* skipped_anchors = nullptr);

Var symmetrize(const Var& a2v, const Var& v2a);
double symmetrize(double a2v, double v2a);

// Matrix-level conveniences.
double infonce_directional(const Matrix& audio, const Matrix& video, Direction direction,
                           double temperature);
double supcon_directional(const Matrix& audio, const Matrix& video, std::span<const int> labels,
                          Direction direction, double temperature);

struct LossWeights {
  double ssl_z = 1.0;
  double sup_z = 1.0;
  double ssl_h = 1.0;
  double sup_h = 1.0;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

struct LossBreakdown {
  double ssl_z = 0.0;
  double sup_z = 0.0;
  double ssl_h = 0.0;
  double sup_h = 0.0;
  double total = 0.0;
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

void to_json(nlohmann::json& j, const LossBreakdown& b);
void from_json(const nlohmann::json& j, LossBreakdown& b);

struct LossVars {
  Var ssl_z;
  Var sup_z;
  Var ssl_h;
  Var sup_h;
  Var total;
  LossBreakdown values() const;
};

// total = w_ssl_z L_ssl(z) + w_sup_z L_sup(z) + w_ssl_h L_ssl(q_ssl) + w_sup_h L_sup(q_sup),
// which is the plain sum under default weights.
LossVars total_loss(const model::ForwardVars& f, std::span<const int> labels, double temperature,
                    const LossWeights& weights = {});

LossBreakdown total_loss(const model::EmbeddingSet& e, std::span<const int> labels,
                         double temperature, const LossWeights& weights = {});

}  // namespace duet::loss
