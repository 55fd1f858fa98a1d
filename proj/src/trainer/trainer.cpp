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


#include "duet/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "duet/data/sampling.hpp"
#include "duet/errors.hpp"
#include "duet/numcore/random.hpp"

namespace duet::train {

namespace fs = std::filesystem;
using loss::LossBreakdown;
using num::Matrix;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(train_alpha >= 0.0 && train_alpha <= 1.0)) throw ConfigError("train alpha must lie in [0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
}

num::AdamWConfig TrainConfig::adamw() const {
  num::AdamWConfig c;
  c.learning_rate = learning_rate;
  c.weight_decay = weight_decay;
  return c;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"weight_decay", c.weight_decay},
                     {"train_alpha", c.train_alpha},
                     {"temperature", c.temperature},
                     {"seed", c.seed},
                     {"loss_weights", c.loss_weights}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("weight_decay").get_to(c.weight_decay);
  j.at("train_alpha").get_to(c.train_alpha);
  j.at("temperature").get_to(c.temperature);
  j.at("seed").get_to(c.seed);
  j.at("loss_weights").get_to(c.loss_weights);
}

double TrainLog::best_val_total() const {
  for (const auto& e : epochs)
    if (e.epoch == best_epoch) return e.val.total;
  return initial_val.total;
}

nlohmann::json log_to_json(const TrainLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train", e.train}, {"val", e.val}});
  }
  return {{"initial_val", log.initial_val}, {"epochs", epochs}, {"best_epoch", log.best_epoch}};
}

nlohmann::json timing_to_json(const TrainLog& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : log.epochs) out.push_back({{"epoch", e.epoch}, {"seconds", e.seconds}});
  return out;
}

void check_compatible(const model::ModelConfig& config, const data::DatasetHeader& header) {
  if (config.audio_input_dim != header.audio_dim || config.video_input_dim != header.video_dim ||
      config.num_audio_layers != header.audio_layers) {
    throw CompatibilityError(
        "model expects audio " + std::to_string(config.audio_input_dim) + "x" +
        std::to_string(config.num_audio_layers) + " layers and video " +
        std::to_string(config.video_input_dim) + " but the dataset has audio " +
        std::to_string(header.audio_dim) + "x" + std::to_string(header.audio_layers) +
        " layers and video " + std::to_string(header.video_dim));
  }
}

StepResult compute_gradients(const model::Model& model, const Matrix& audio, const Matrix& video,
                             std::span<const int> labels, const TrainConfig& config,
                             num::Mode mode, num::Rng& dropout_rng) {
  num::Tape tape;
  const model::BoundModel bound = model::bind(tape, model, true);
  const auto f = model::forward_full(bound, audio, video, config.train_alpha, mode, dropout_rng);
  const auto losses = loss::total_loss(f, labels, config.temperature, config.loss_weights);
  tape.backward(losses.total);
  StepResult r;
  r.loss = losses.values();
  r.grads.reserve(bound.flat.size());
  for (const auto& v : bound.flat) r.grads.push_back(v.grad());
  return r;
}

LossBreakdown train_step(model::Model& model, num::AdamWState& optimizer, const Matrix& audio,
                         const Matrix& video, std::span<const int> labels,
                         const TrainConfig& config, num::Rng& dropout_rng) {
  StepResult step =
      compute_gradients(model, audio, video, labels, config, num::Mode::kTrain, dropout_rng);
  std::vector<Matrix*> params;
  for (auto& p : model.parameters()) params.push_back(p.value);
  num::adamw_step(params, step.grads, optimizer);
  return step.loss;
}

namespace {

struct Batch {
  Matrix audio;
  Matrix video;
  std::vector<int> labels;
};

Batch gather(const data::Dataset& d, std::span<const std::size_t> item_indices) {
  std::vector<std::size_t> rows;
  Batch b;
  for (std::size_t i : item_indices) {
    rows.push_back(d.manifest.items[i].row);
    b.labels.push_back(d.manifest.items[i].genre);
  }
  b.audio = num::gather_rows(d.audio, rows);
  b.video = num::gather_rows(d.video, rows);
  return b;
}

void accumulate(LossBreakdown& acc, const LossBreakdown& x, double w) {
  acc.ssl_z += w * x.ssl_z;
  acc.sup_z += w * x.sup_z;
  acc.ssl_h += w * x.ssl_h;
  acc.sup_h += w * x.sup_h;
  acc.total += w * x.total;
}

void check_finite(const LossBreakdown& l, std::size_t epoch, std::size_t batch) {
  const std::pair<const char*, double> parts[] = {
      {"ssl_z", l.ssl_z}, {"sup_z", l.sup_z}, {"ssl_h", l.ssl_h}, {"sup_h", l.sup_h}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite loss component " + std::string(name) + " at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batch));
    }
  }
}

}  // namespace

LossBreakdown evaluate_loss(const model::Model& model, const data::Dataset& dataset,
                            data::Split split, double alpha, double temperature,
                            std::size_t batch_size, const loss::LossWeights& weights) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const auto indices = dataset.manifest.indices_of(split);
  if (indices.empty()) {
    throw ConfigError("split '" + std::string(data::to_string(split)) + "' is empty");
  }
  LossBreakdown acc;
  num::Rng unused(0);
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    const Batch b = gather(dataset, std::span(indices).subspan(start, end - start));
    num::Tape tape;
    const auto bound = model::bind(tape, model, false);
    const auto f = model::forward_full(bound, b.audio, b.video, alpha, num::Mode::kEval, unused);
    const auto l = loss::total_loss(f, b.labels, temperature, weights).values();
    accumulate(acc, l, static_cast<double>(end - start));
  }
  const double n = static_cast<double>(indices.size());
  acc.ssl_z /= n;
  acc.sup_z /= n;
  acc.ssl_h /= n;
  acc.sup_h /= n;
  acc.total /= n;
  return acc;
}

TrainResult train(const data::Dataset& dataset, const model::ModelConfig& model_config,
                  const TrainConfig& config, const std::optional<fs::path>& checkpoint_dir,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  check_compatible(model_config, dataset.manifest.header);
  if (dataset.manifest.indices_of(data::Split::kVal).empty()) {
    throw ConfigError("validation split is empty");
  }
  const data::BalancedSampler sampler(dataset.manifest, data::Split::kTrain);

  num::Rng init_rng = num::derive_rng(config.seed, "init");
  num::Rng sampler_rng = num::derive_rng(config.seed, "sampler");
  num::Rng dropout_rng = num::derive_rng(config.seed, "dropout");

  Checkpoint current;
  current.model = model::init_model(model_config, init_rng);
  current.optimizer = num::AdamWState::for_params(current.model.parameter_values(), config.adamw());
  current.train_config = config;

  auto val_loss = [&](const model::Model& m) {
    return evaluate_loss(m, dataset, data::Split::kVal, config.train_alpha, config.temperature,
                         config.batch_size, config.loss_weights);
  };

  TrainResult result;
  result.log.initial_val = val_loss(current.model);
  result.best = current;
  double best_total = std::numeric_limits<double>::infinity();
  if (checkpoint_dir) fs::create_directories(*checkpoint_dir);

  const std::size_t batches = sampler.batches_per_epoch(config.batch_size);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto idx = sampler.next_batch(config.batch_size, sampler_rng);
      const Batch batch = gather(dataset, idx);
      LossBreakdown l;
      try {
        l = train_step(current.model, current.optimizer, batch.audio, batch.video, batch.labels,
                       config, dropout_rng);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(b) + ")");
      }
      check_finite(l, epoch, b);
      accumulate(rec.train, l, 1.0 / static_cast<double>(batches));
    }
    current.epoch = epoch;
    rec.val = val_loss(current.model);
    check_finite(rec.val, epoch, batches);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const bool improved = rec.val.total < best_total;
    if (improved) {
      best_total = rec.val.total;
      result.best = current;
      result.log.best_epoch = epoch;
      if (checkpoint_dir) save_checkpoint(*checkpoint_dir / kBestCheckpoint, current);
    }
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, improved);
  }
  return result;
}

LossBreakdown validate(const Checkpoint& ckpt, const data::Dataset& dataset, data::Split split) {
  check_compatible(ckpt.model.config, dataset.manifest.header);
  const auto& c = ckpt.train_config;
  return evaluate_loss(ckpt.model, dataset, split, c.train_alpha, c.temperature, c.batch_size,
                       c.loss_weights);
}

}  // namespace duet::train
