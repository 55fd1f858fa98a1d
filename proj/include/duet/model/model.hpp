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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/numcore/matrix.hpp"
#include "duet/numcore/ops.hpp"
#include "duet/numcore/tape.hpp"

namespace duet::model {

using num::Matrix;
using num::Mode;
using num::Rng;
using num::Tape;
using num::Var;

enum class Modality { kAudio, kVideo };

struct ModelConfig {
  std::size_t audio_input_dim = 64;
  std::size_t video_input_dim = 32;
  std::size_t embed_dim = 32;
  // Widths of the shared network blocks {linear -> relu -> dropout}.
  std::vector<std::size_t> g_hidden_dims{128, 128};
  // Widths of the task-head blocks; each head ends in a linear to embed_dim.
  std::vector<std::size_t> h_hidden_dims{64};
  double dropout_p = 0.4;
  // Number of stacked audio layers to aggregate; 0 disables aggregation.
  std::size_t num_audio_layers = 0;
  bool normalize_q = true;
  // Normalizes the projector outputs before the alpha combination and the
  // combined embedding after it.
  bool normalize_z = true;

  // 1024-d audio, 512-d video, 256-d embeddings.
  static ModelConfig paper_scale();

  std::size_t input_dim(Modality m) const {
    return m == Modality::kAudio ? audio_input_dim : video_input_dim;
  }
  // Column count of a raw audio batch (stacked layers when aggregation is on).
  std::size_t audio_feature_cols() const {
    return num_audio_layers == 0 ? audio_input_dim : audio_input_dim * num_audio_layers;
  }

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct Linear {
  Matrix weight;  // fan_in x fan_out
  Matrix bias;    // 1 x fan_out
  friend bool operator==(const Linear&, const Linear&) = default;
};

struct Mlp {
  std::vector<Linear> layers;
  // True for the shared network (every layer is a full block); false for
  // heads, whose last layer is a bare linear.
  bool activate_last = true;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct BranchParams {
  Mlp g;
  Mlp h_ssl;
  Mlp h_sup;
  Linear p_ssl;
  Linear p_sup;
  Matrix layer_weights;  // 1 x num_audio_layers, audio branch only; empty otherwise
  friend bool operator==(const BranchParams&, const BranchParams&) = default;
};

struct ParamRef {
  std::string name;  // e.g. "audio.h_sup.0.weight"
  std::string group;  // e.g. "audio.h_sup"
  Matrix* value;
};

struct Model {
  ModelConfig config;
  BranchParams audio;
  BranchParams video;

  BranchParams& branch(Modality m) { return m == Modality::kAudio ? audio : video; }
  const BranchParams& branch(Modality m) const { return m == Modality::kAudio ? audio : video; }

  // Every trainable tensor in a fixed canonical order.
  std::vector<ParamRef> parameters();
  std::vector<const Matrix*> parameter_values() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Model&, const Model&) = default;
};

// Xavier-uniform weights, zero biases, zero layer weights.
Model init_model(const ModelConfig& config, Rng& rng);

// Tape handles for one branch, mirroring BranchParams.
struct BranchVars {
  std::vector<std::pair<Var, Var>> g;
  std::vector<std::pair<Var, Var>> h_ssl;
  std::vector<std::pair<Var, Var>> h_sup;
  std::pair<Var, Var> p_ssl;
  std::pair<Var, Var> p_sup;
  std::optional<Var> layer_weights;
};

struct BoundModel {
  const ModelConfig* config = nullptr;
  BranchVars audio;
  BranchVars video;
  // Same order as Model::parameters().
  std::vector<Var> flat;
  const BranchVars& branch(Modality m) const { return m == Modality::kAudio ? audio : video; }
};

// Places every parameter on the tape, as variables when trainable and as
// constants otherwise.
BoundModel bind(Tape& tape, const Model& model, bool trainable);

struct QVars {
  Var q_ssl;
  Var q_sup;
};

struct CombineVars {
  Var u;  // maybe-normalized p_ssl(q_ssl)
  Var v;  // maybe-normalized p_sup(q_sup)
  Var z;
};

struct ForwardVars {
  QVars audio_q;
  QVars video_q;
  CombineVars audio;
  CombineVars video;
  double alpha = 0.0;
};

// softmax(w)-weighted sum of the stacked layers of every row.
Var aggregate_layers(const Var& layer_weights, const Matrix& stacked);

QVars forward_branch(const Var& x, const BranchVars& params, const ModelConfig& config, Mode mode,
                     Rng& rng);

CombineVars combine(const QVars& q, const BranchVars& params, const ModelConfig& config,
                    double alpha);

// Row i of audio and video is one pair. Dropout masks are drawn audio first,
// then video.
ForwardVars forward_full(const BoundModel& model, const Matrix& audio, const Matrix& video,
                         double alpha, Mode mode, Rng& rng);

// Value-level combination used by retrieval: (1 - alpha) u + alpha v,
// row-normalized when normalize is set. u and v are expected to be unit rows
// when normalize is set; alpha 0 and 1 return u and v unchanged.
Matrix combine_values(const Matrix& u, const Matrix& v, double alpha, bool normalize);

void check_alpha(double alpha);

struct EmbeddingSet {
  Matrix q_ssl_audio;
  Matrix q_sup_audio;
  Matrix q_ssl_video;
  Matrix q_sup_video;
  Matrix u_audio;
  Matrix v_audio;
  Matrix u_video;
  Matrix v_video;
  Matrix z_audio;
  Matrix z_video;
  double alpha = 0.0;
  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

EmbeddingSet to_embedding_set(const ForwardVars& f);

// Plain-value conveniences built on the tape path.
Matrix aggregate_layers(const Matrix& per_layer, const Matrix& layer_weights);
std::pair<Matrix, Matrix> forward_branch(const Matrix& x, const Model& model, Modality modality,
                                         Mode mode, Rng& rng);
Matrix combine(const Matrix& q_ssl, const Matrix& q_sup, const Model& model, Modality modality,
               double alpha);
EmbeddingSet forward_full(const Model& model, const Matrix& audio, const Matrix& video,
                          double alpha, Mode mode, Rng& rng);

}  // namespace duet::model
