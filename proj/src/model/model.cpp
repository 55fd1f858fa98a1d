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


#include "duet/model/model.hpp"

#include <cmath>

#include "duet/errors.hpp"

namespace duet::model {

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.audio_input_dim = 1024;
  c.video_input_dim = 512;
  c.embed_dim = 256;
  c.g_hidden_dims = {512, 512};
  c.h_hidden_dims = {256};
  return c;
}

void ModelConfig::validate() const {
  if (audio_input_dim == 0 || video_input_dim == 0 || embed_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (g_hidden_dims.empty()) throw ConfigError("shared network needs at least one block");
  for (auto d : g_hidden_dims)
    if (d == 0) throw ConfigError("g hidden widths must be positive");
  for (auto d : h_hidden_dims)
    if (d == 0) throw ConfigError("h hidden widths must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("dropout_p must lie in [0, 1), got " + std::to_string(dropout_p));
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"audio_input_dim", c.audio_input_dim},
                     {"video_input_dim", c.video_input_dim},
                     {"embed_dim", c.embed_dim},
                     {"g_hidden_dims", c.g_hidden_dims},
                     {"h_hidden_dims", c.h_hidden_dims},
                     {"dropout_p", c.dropout_p},
                     {"num_audio_layers", c.num_audio_layers},
                     {"normalize_q", c.normalize_q},
                     {"normalize_z", c.normalize_z}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("audio_input_dim").get_to(c.audio_input_dim);
  j.at("video_input_dim").get_to(c.video_input_dim);
  j.at("embed_dim").get_to(c.embed_dim);
  j.at("g_hidden_dims").get_to(c.g_hidden_dims);
  j.at("h_hidden_dims").get_to(c.h_hidden_dims);
  j.at("dropout_p").get_to(c.dropout_p);
  j.at("num_audio_layers").get_to(c.num_audio_layers);
  j.at("normalize_q").get_to(c.normalize_q);
  j.at("normalize_z").get_to(c.normalize_z);
}

namespace {

Linear init_linear(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  Linear l{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
  for (auto& w : l.weight.data()) w = u(rng);
  return l;
}

Mlp init_mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::optional<std::size_t> out,
             Rng& rng) {
  Mlp m;
  m.activate_last = !out.has_value();
  for (auto h : hidden) {
    m.layers.push_back(init_linear(in, h, rng));
    in = h;
  }
  if (out) m.layers.push_back(init_linear(in, *out, rng));
  return m;
}

BranchParams init_branch(const ModelConfig& c, Modality modality, Rng& rng) {
  BranchParams b;
  b.g = init_mlp(c.input_dim(modality), c.g_hidden_dims, std::nullopt, rng);
  const std::size_t shared = c.g_hidden_dims.back();
  b.h_ssl = init_mlp(shared, c.h_hidden_dims, c.embed_dim, rng);
  b.h_sup = init_mlp(shared, c.h_hidden_dims, c.embed_dim, rng);
  b.p_ssl = init_linear(c.embed_dim, c.embed_dim, rng);
  b.p_sup = init_linear(c.embed_dim, c.embed_dim, rng);
  if (modality == Modality::kAudio && c.num_audio_layers > 0) {
    b.layer_weights = Matrix(1, c.num_audio_layers);
  }
  return b;
}

template <typename Fn>
void visit_branch(BranchParams& b, const std::string& prefix, Fn&& fn) {
  auto visit_mlp = [&](Mlp& m, const std::string& name) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      const std::string base = prefix + "." + name + "." + std::to_string(i);
      fn(base + ".weight", prefix + "." + name, m.layers[i].weight);
      fn(base + ".bias", prefix + "." + name, m.layers[i].bias);
    }
  };
  visit_mlp(b.g, "g");
  visit_mlp(b.h_ssl, "h_ssl");
  visit_mlp(b.h_sup, "h_sup");
  fn(prefix + ".p_ssl.weight", prefix + ".p_ssl", b.p_ssl.weight);
  fn(prefix + ".p_ssl.bias", prefix + ".p_ssl", b.p_ssl.bias);
  fn(prefix + ".p_sup.weight", prefix + ".p_sup", b.p_sup.weight);
  fn(prefix + ".p_sup.bias", prefix + ".p_sup", b.p_sup.bias);
  if (!b.layer_weights.empty()) fn(prefix + ".layer_weights", prefix + ".layer_weights", b.layer_weights);
}

Var apply_linear(const Var& x, const std::pair<Var, Var>& layer) {
  return num::add_row(num::matmul(x, layer.first), layer.second);
}

Var apply_mlp(Var x, const std::vector<std::pair<Var, Var>>& layers, bool activate_last,
              double dropout_p, Mode mode, Rng& rng) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = apply_linear(x, layers[i]);
    if (i + 1 < layers.size() || activate_last) {
      x = num::relu(x);
      x = num::dropout(x, dropout_p, mode, rng);
    }
  }
  return x;
}

}  // namespace

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> out;
  auto collect = [&](const std::string& name, const std::string& group, Matrix& m) {
    out.push_back(ParamRef{name, group, &m});
  };
  visit_branch(audio, "audio", collect);
  visit_branch(video, "video", collect);
  return out;
}

std::vector<const Matrix*> Model::parameter_values() const {
  std::vector<const Matrix*> out;
  for (const auto& p : const_cast<Model*>(this)->parameters()) out.push_back(p.value);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : parameter_values()) n += m->size();
  return n;
}

Model init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  Model m;
  m.config = config;
  m.audio = init_branch(config, Modality::kAudio, rng);
  m.video = init_branch(config, Modality::kVideo, rng);
  return m;
}

BoundModel bind(Tape& tape, const Model& model, bool trainable) {
  BoundModel b;
  b.config = &model.config;
  auto leaf = [&](const Matrix& m) {
    Var v = trainable ? tape.variable(m) : tape.constant(m);
    b.flat.push_back(v);
    return v;
  };
  auto bind_mlp = [&](const Mlp& m) {
    std::vector<std::pair<Var, Var>> out;
    for (const auto& l : m.layers) {
      Var w = leaf(l.weight);
      Var bias = leaf(l.bias);
      out.emplace_back(w, bias);
    }
    return out;
  };
  auto bind_branch = [&](const BranchParams& p, BranchVars& out) {
    out.g = bind_mlp(p.g);
    out.h_ssl = bind_mlp(p.h_ssl);
    out.h_sup = bind_mlp(p.h_sup);
    Var w = leaf(p.p_ssl.weight);
    out.p_ssl = {w, leaf(p.p_ssl.bias)};
    w = leaf(p.p_sup.weight);
    out.p_sup = {w, leaf(p.p_sup.bias)};
    if (!p.layer_weights.empty()) out.layer_weights = leaf(p.layer_weights);
  };
  bind_branch(model.audio, b.audio);
  bind_branch(model.video, b.video);
  return b;
}

Var aggregate_layers(const Var& layer_weights, const Matrix& stacked) {
  if (layer_weights.rows() != 1 || layer_weights.cols() == 0 ||
      stacked.cols() % layer_weights.cols() != 0) {
    throw ShapeError("aggregate_layers: " + std::to_string(layer_weights.cols()) +
                     " layer weights for features " + stacked.shape_string());
  }
  Var w = num::exp(num::log_softmax_rows(layer_weights));
  return num::layer_mix(w, stacked);
}

QVars forward_branch(const Var& x, const BranchVars& params, const ModelConfig& config, Mode mode,
                     Rng& rng) {
  const std::size_t expected = params.g.front().first.rows();
  if (x.cols() != expected) {
    throw ShapeError("forward_branch: input " + x.value().shape_string() + " but branch expects " +
                     std::to_string(expected) + " columns");
  }
  const Var shared = apply_mlp(x, params.g, true, config.dropout_p, mode, rng);
  Var q_ssl = apply_mlp(shared, params.h_ssl, false, config.dropout_p, mode, rng);
  Var q_sup = apply_mlp(shared, params.h_sup, false, config.dropout_p, mode, rng);
  if (config.normalize_q) {
    q_ssl = num::l2_normalize_rows(q_ssl);
    q_sup = num::l2_normalize_rows(q_sup);
  }
  return {q_ssl, q_sup};
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

CombineVars combine(const QVars& q, const BranchVars& params, const ModelConfig& config,
                    double alpha) {
  check_alpha(alpha);
  Var u = apply_linear(q.q_ssl, params.p_ssl);
  Var v = apply_linear(q.q_sup, params.p_sup);
  if (config.normalize_z) {
    u = num::l2_normalize_rows(u);
    v = num::l2_normalize_rows(v);
  }
  // At the endpoints z is one already-normalized term, taken as is.
  if (alpha == 0.0) return {u, v, u};
  if (alpha == 1.0) return {u, v, v};
  Var z = num::axpby(1.0 - alpha, u, alpha, v);
  if (config.normalize_z) z = num::l2_normalize_rows(z);
  return {u, v, z};
}

Matrix combine_values(const Matrix& u, const Matrix& v, double alpha, bool normalize) {
  check_alpha(alpha);
  if (alpha == 0.0) return u;
  if (alpha == 1.0) return v;
  Matrix z = num::axpby(1.0 - alpha, u, alpha, v);
  return normalize ? num::l2_normalize_rows(z) : z;
}

ForwardVars forward_full(const BoundModel& model, const Matrix& audio, const Matrix& video,
                         double alpha, Mode mode, Rng& rng) {
  if (audio.rows() != video.rows()) {
    throw AlignmentError("audio batch has " + std::to_string(audio.rows()) +
                         " rows but video batch has " + std::to_string(video.rows()));
  }
  check_alpha(alpha);
  const ModelConfig& c = *model.config;
  Tape& tape = model.flat.front().tape();

  Var xa;
  if (model.audio.layer_weights) {
    if (audio.cols() != c.audio_feature_cols()) {
      throw ShapeError("audio batch " + audio.shape_string() + " but expected " +
                       std::to_string(c.num_audio_layers) + " stacked layers of " +
                       std::to_string(c.audio_input_dim));
    }
    xa = aggregate_layers(*model.audio.layer_weights, audio);
  } else {
    xa = tape.constant(audio);
  }
  const Var xv = tape.constant(video);

  ForwardVars f;
  f.alpha = alpha;
  f.audio_q = forward_branch(xa, model.audio, c, mode, rng);
  f.video_q = forward_branch(xv, model.video, c, mode, rng);
  f.audio = combine(f.audio_q, model.audio, c, alpha);
  f.video = combine(f.video_q, model.video, c, alpha);
  return f;
}

EmbeddingSet to_embedding_set(const ForwardVars& f) {
  return EmbeddingSet{f.audio_q.q_ssl.value(), f.audio_q.q_sup.value(), f.video_q.q_ssl.value(),
                      f.video_q.q_sup.value(), f.audio.u.value(),       f.audio.v.value(),
                      f.video.u.value(),       f.video.v.value(),       f.audio.z.value(),
                      f.video.z.value(),       f.alpha};
}

Matrix aggregate_layers(const Matrix& per_layer, const Matrix& layer_weights) {
  if (layer_weights.rows() != 1 || layer_weights.cols() != per_layer.rows()) {
    throw ShapeError("aggregate_layers: weights " + layer_weights.shape_string() + " for " +
                     std::to_string(per_layer.rows()) + " layers");
  }
  Tape tape;
  const Var w = tape.constant(layer_weights);
  const Matrix stacked(1, per_layer.size(), per_layer.data());
  return aggregate_layers(w, stacked).value();
}

std::pair<Matrix, Matrix> forward_branch(const Matrix& x, const Model& model, Modality modality,
                                         Mode mode, Rng& rng) {
  Tape tape;
  const BoundModel b = bind(tape, model, false);
  const QVars q = forward_branch(tape.constant(x), b.branch(modality), model.config, mode, rng);
  return {q.q_ssl.value(), q.q_sup.value()};
}

Matrix combine(const Matrix& q_ssl, const Matrix& q_sup, const Model& model, Modality modality,
               double alpha) {
  Tape tape;
  const BoundModel b = bind(tape, model, false);
  const QVars q{tape.constant(q_ssl), tape.constant(q_sup)};
  return combine(q, b.branch(modality), model.config, alpha).z.value();
}

EmbeddingSet forward_full(const Model& model, const Matrix& audio, const Matrix& video,
                          double alpha, Mode mode, Rng& rng) {
  Tape tape;
  const BoundModel b = bind(tape, model, false);
  return to_embedding_set(forward_full(b, audio, video, alpha, mode, rng));
}

}  // namespace duet::model
