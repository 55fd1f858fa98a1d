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


#include "duet/losses/contrastive.hpp"

#include "duet/errors.hpp"
#include "duet/numcore/ops.hpp"

namespace duet::loss {

namespace {

void check_temperature(double t) {
  if (!(t > 0.0)) throw ParameterError("temperature must be positive, got " + std::to_string(t));
}

void check_pair(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw AlignmentError("contrastive batch shapes " + a.value().shape_string() + " and " +
                         b.value().shape_string() + " are not aligned");
  }
  if (a.rows() == 0) throw ShapeError("contrastive batch is empty");
}

// log softmax over candidates of the scaled similarity of every anchor.
Var log_probs(const Var& anchors, const Var& candidates, double temperature) {
  return num::log_softmax_rows(num::scale(num::matmul_bt(anchors, candidates), 1.0 / temperature));
}

}  // namespace

Var infonce_directional(const Var& audio, const Var& video, Direction direction,
                        double temperature) {
  check_temperature(temperature);
  check_pair(audio, video);
  const bool a2v = direction == Direction::kAudioToVideo;
  const Var lp = log_probs(a2v ? audio : video, a2v ? video : audio, temperature);
  const std::size_t n = audio.rows();
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) w(i, i) = -1.0 / static_cast<double>(n);
  return num::weighted_sum(lp, w);
}

Var supcon(const Var& anchors, const Var& candidates, std::span<const int> anchor_labels,
           std::span<const int> candidate_labels, double temperature,
           std::size_t* skipped_anchors) {
  check_temperature(temperature);
  if (anchor_labels.size() != anchors.rows() || candidate_labels.size() != candidates.rows()) {
    throw AlignmentError("supcon: label counts do not match embedding rows");
  }
  if (anchors.cols() != candidates.cols()) {
    throw ShapeError("supcon: anchor " + anchors.value().shape_string() + " and candidate " +
                     candidates.value().shape_string() + " widths differ");
  }
  const Var lp = log_probs(anchors, candidates, temperature);
  const std::size_t n = anchors.rows();
  const std::size_t m = candidates.rows();

  Matrix w(n, m);
  std::size_t contributing = 0;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t positives = 0;
    for (std::size_t p = 0; p < m; ++p) positives += candidate_labels[p] == anchor_labels[i];
    if (positives == 0) {
      ++skipped;
      continue;
    }
    ++contributing;
    for (std::size_t p = 0; p < m; ++p)
      if (candidate_labels[p] == anchor_labels[i]) w(i, p) = 1.0 / static_cast<double>(positives);
  }
  if (skipped_anchors) *skipped_anchors = skipped;
  if (contributing > 0) {
    const double inv = -1.0 / static_cast<double>(contributing);
    for (auto& v : w.data()) v *= inv;
  }
  return num::weighted_sum(lp, w);
}

Var supcon_directional(const Var& audio, const Var& video, std::span<const int> labels,
                       Direction direction, double temperature) {
  check_pair(audio, video);
  const bool a2v = direction == Direction::kAudioToVideo;
  return supcon(a2v ? audio : video, a2v ? video : audio, labels, labels, temperature);
}

Var symmetrize(const Var& a2v, const Var& v2a) { return num::scale(num::add(a2v, v2a), 0.5); }

double symmetrize(double a2v, double v2a) { return 0.5 * (a2v + v2a); }

double infonce_directional(const Matrix& audio, const Matrix& video, Direction direction,
                           double temperature) {
  num::Tape tape;
  return infonce_directional(tape.constant(audio), tape.constant(video), direction, temperature)
      .value()
      .item();
}

double supcon_directional(const Matrix& audio, const Matrix& video, std::span<const int> labels,
                          Direction direction, double temperature) {
  num::Tape tape;
  return supcon_directional(tape.constant(audio), tape.constant(video), labels, direction,
                            temperature)
      .value()
      .item();
}

void to_json(nlohmann::json& j, const LossWeights& w) {
  j = nlohmann::json{{"ssl_z", w.ssl_z}, {"sup_z", w.sup_z}, {"ssl_h", w.ssl_h}, {"sup_h", w.sup_h}};
}

void from_json(const nlohmann::json& j, LossWeights& w) {
  j.at("ssl_z").get_to(w.ssl_z);
  j.at("sup_z").get_to(w.sup_z);
  j.at("ssl_h").get_to(w.ssl_h);
  j.at("sup_h").get_to(w.sup_h);
}

void to_json(nlohmann::json& j, const LossBreakdown& b) {
  j = nlohmann::json{{"ssl_z", b.ssl_z},
                     {"sup_z", b.sup_z},
                     {"ssl_h", b.ssl_h},
                     {"sup_h", b.sup_h},
                     {"total", b.total}};
}

void from_json(const nlohmann::json& j, LossBreakdown& b) {
  j.at("ssl_z").get_to(b.ssl_z);
  j.at("sup_z").get_to(b.sup_z);
  j.at("ssl_h").get_to(b.ssl_h);
  j.at("sup_h").get_to(b.sup_h);
  j.at("total").get_to(b.total);
}

LossBreakdown LossVars::values() const {
  return LossBreakdown{ssl_z.value().item(), sup_z.value().item(), ssl_h.value().item(),
                       sup_h.value().item(), total.value().item()};
}

namespace {

Var infonce_sym(const Var& a, const Var& v, double t) {
  return symmetrize(infonce_directional(a, v, Direction::kAudioToVideo, t),
                    infonce_directional(a, v, Direction::kVideoToAudio, t));
}

Var supcon_sym(const Var& a, const Var& v, std::span<const int> labels, double t) {
  return symmetrize(supcon_directional(a, v, labels, Direction::kAudioToVideo, t),
                    supcon_directional(a, v, labels, Direction::kVideoToAudio, t));
}

}  // namespace

LossVars total_loss(const model::ForwardVars& f, std::span<const int> labels, double temperature,
                    const LossWeights& weights) {
  if (labels.size() != f.audio.z.rows()) {
    throw AlignmentError("total_loss: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(f.audio.z.rows()) + " pairs");
  }
  LossVars out;
  out.ssl_z = infonce_sym(f.audio.z, f.video.z, temperature);
  out.sup_z = supcon_sym(f.audio.z, f.video.z, labels, temperature);
  out.ssl_h = infonce_sym(f.audio_q.q_ssl, f.video_q.q_ssl, temperature);
  out.sup_h = supcon_sym(f.audio_q.q_sup, f.video_q.q_sup, labels, temperature);

  auto weighted = [](const Var& v, double w) { return w == 1.0 ? v : num::scale(v, w); };
  out.total = weighted(out.ssl_z, weights.ssl_z);
  out.total = num::add(out.total, weighted(out.sup_z, weights.sup_z));
  out.total = num::add(out.total, weighted(out.ssl_h, weights.ssl_h));
  out.total = num::add(out.total, weighted(out.sup_h, weights.sup_h));
  return out;
}

LossBreakdown total_loss(const model::EmbeddingSet& e, std::span<const int> labels,
                         double temperature, const LossWeights& weights) {
  num::Tape tape;
  model::ForwardVars f;
  f.alpha = e.alpha;
  f.audio_q = {tape.constant(e.q_ssl_audio), tape.constant(e.q_sup_audio)};
  f.video_q = {tape.constant(e.q_ssl_video), tape.constant(e.q_sup_video)};
  f.audio = {tape.constant(e.u_audio), tape.constant(e.v_audio), tape.constant(e.z_audio)};
  f.video = {tape.constant(e.u_video), tape.constant(e.v_video), tape.constant(e.z_video)};
  return total_loss(f, labels, temperature, weights).values();
}

}  // namespace duet::loss
