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
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/data/manifest.hpp"
#include "duet/losses/contrastive.hpp"
#include "duet/model/model.hpp"
#include "duet/numcore/adamw.hpp"

namespace duet::train {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double train_alpha = 0.5;
  double temperature = 0.1;
  std::uint64_t seed = 0;
  loss::LossWeights loss_weights;

  void validate() const;
  num::AdamWConfig adamw() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Everything needed to resume or evaluate a run.
struct Checkpoint {
  model::Model model;
  num::AdamWState optimizer;
  TrainConfig train_config;
  // Epoch whose parameters are stored; 0 means the initialization.
  std::size_t epoch = 0;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Binary layout, integers and doubles little-endian:
//   "DUETCKPT" | u32 version (1) | u32 reserved | u64 N | N bytes of JSON metadata
//   | parameter tensors | first moments | second moments   (f64, canonical order)
// The metadata lists every tensor name and shape so readers can validate the
// payload before touching it.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Accepts a checkpoint file, a path missing its ".ckpt" suffix, or a directory
// holding best.ckpt.
std::filesystem::path resolve_checkpoint_path(const std::filesystem::path& path);

inline constexpr const char* kBestCheckpoint = "best.ckpt";

struct EpochRecord {
  std::size_t epoch = 0;
  loss::LossBreakdown train;  // mean over the epoch's batches
  loss::LossBreakdown val;
  double seconds = 0.0;
};

struct TrainLog {
  loss::LossBreakdown initial_val;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;

  double best_val_total() const;
};

// Wall-clock time is left out so identical runs serialize identically.
nlohmann::json log_to_json(const TrainLog& log);
nlohmann::json timing_to_json(const TrainLog& log);

struct TrainResult {
  Checkpoint best;
  TrainLog log;
};

struct StepResult {
  loss::LossBreakdown loss;
  std::vector<num::Matrix> grads;  // Model::parameters() order
};

// Loss and gradients of one batch given as feature rows.
StepResult compute_gradients(const model::Model& model, const num::Matrix& audio,
                             const num::Matrix& video, std::span<const int> labels,
                             const TrainConfig& config, num::Mode mode, num::Rng& dropout_rng);

// compute_gradients followed by one AdamW update.
loss::LossBreakdown train_step(model::Model& model, num::AdamWState& optimizer,
                               const num::Matrix& audio, const num::Matrix& video,
                               std::span<const int> labels, const TrainConfig& config,
                               num::Rng& dropout_rng);

// Eval-mode loss over a split in sequential batches of batch_size, each
// batch weighted by its size.
loss::LossBreakdown evaluate_loss(const model::Model& model, const data::Dataset& dataset,
                                  data::Split split, double alpha, double temperature,
                                  std::size_t batch_size, const loss::LossWeights& weights = {});

using EpochCallback = std::function<void(const EpochRecord&, bool improved)>;

// Class-balanced batches at the training alpha, AdamW, and best-validation
// checkpoint selection. Writes best.ckpt into checkpoint_dir on every
// improvement when a directory is given.
TrainResult train(const data::Dataset& dataset, const model::ModelConfig& model_config,
                  const TrainConfig& config,
                  const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                  const EpochCallback& on_epoch = nullptr);

// Eval-mode loss of a checkpoint on a split at its training alpha.
loss::LossBreakdown validate(const Checkpoint& ckpt, const data::Dataset& dataset,
                             data::Split split);

// Throws CompatibilityError when the dataset dims differ from the model's.
void check_compatible(const model::ModelConfig& config, const data::DatasetHeader& header);

}  // namespace duet::train
