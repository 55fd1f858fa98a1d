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


#include <gtest/gtest.h>

#include <cmath>

#include "duet/data/synthetic.hpp"
#include "duet/errors.hpp"
#include "duet/numcore/random.hpp"
#include "duet/trainer/trainer.hpp"
#include "test_util.hpp"

namespace data = duet::data;
namespace model = duet::model;
namespace num = duet::num;
namespace train = duet::train;
using num::Matrix;

namespace {

data::Dataset tiny_dataset(std::uint64_t seed = 7) {
  data::SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.items_per_class = 30;
  cfg.audio_dim = 8;
  cfg.video_dim = 6;
  cfg.pair_latent_dim = 4;
  cfg.seed = seed;
  return data::generate_synthetic(cfg);
}

model::ModelConfig tiny_model(const data::Dataset& ds) {
  model::ModelConfig c;
  c.audio_input_dim = ds.manifest.header.audio_dim;
  c.video_input_dim = ds.manifest.header.video_dim;
  c.embed_dim = 4;
  c.g_hidden_dims = {32};
  c.h_hidden_dims = {32};
  c.dropout_p = 0.1;
  return c;
}

train::TrainConfig tiny_train() {
  train::TrainConfig t;
  t.epochs = 3;
  t.batch_size = 16;
  t.seed = 3;
  return t;
}

}  // namespace

TEST(Step, SmallLearningRateDecreasesLossOverSeeds) {
  const auto ds = tiny_dataset();
  const auto mc = tiny_model(ds);
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto init = num::derive_rng(seed, "init");
    auto m = model::init_model(mc, init);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 12; ++i) idx.push_back((seed * 5 + i * 7) % ds.manifest.items.size());
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (auto i : idx) {
      rows.push_back(ds.manifest.items[i].row);
      labels.push_back(ds.manifest.items[i].genre);
    }
    const Matrix a = num::gather_rows(ds.audio, rows);
    const Matrix v = num::gather_rows(ds.video, rows);
    auto tc = tiny_train();
    tc.learning_rate = 1e-5;
    tc.weight_decay = 0.0;
    num::Rng r(0);
    const double before =
        train::compute_gradients(m, a, v, labels, tc, num::Mode::kEval, r).loss.total;
    auto opt = num::AdamWState::for_params(m.parameter_values(), tc.adamw());
    // Eval mode for the step too: the comparison must not depend on dropout.
    auto step = train::compute_gradients(m, a, v, labels, tc, num::Mode::kEval, r);
    auto params = m.parameters();
    std::vector<Matrix*> ptrs;
    for (auto& p : params) ptrs.push_back(p.value);
    num::adamw_step(ptrs, step.grads, opt);
    const double after =
        train::compute_gradients(m, a, v, labels, tc, num::Mode::kEval, r).loss.total;
    if (after < before) ++decreased;
  }
  EXPECT_EQ(decreased, 20);
}

TEST(Step, GradientsReachEveryGroup) {
  const auto ds = tiny_dataset();
  auto mc = tiny_model(ds);
  auto init = num::derive_rng(1, "init");
  auto m = model::init_model(mc, init);
  std::vector<std::size_t> rows{0, 1, 2, 3, 40, 41, 80, 81};
  std::vector<int> labels;
  for (auto r : rows) labels.push_back(ds.manifest.items[r].genre);
  num::Rng r(0);
  const auto s = train::compute_gradients(m, num::gather_rows(ds.audio, rows),
                                          num::gather_rows(ds.video, rows), labels, tiny_train(),
                                          num::Mode::kTrain, r);
  std::map<std::string, double> by_group;
  const auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    for (double g : s.grads[i].data()) by_group[params[i].group] += std::abs(g);
  for (const auto& [g, total] : by_group) EXPECT_GT(total, 0.0) << g;
  EXPECT_GE(by_group.size(), 10u);
}

TEST(Train, ZeroLearningRateIsFixedPoint) {
  const auto ds = tiny_dataset();
  auto tc = tiny_train();
  tc.learning_rate = 0.0;
  const auto res = train::train(ds, tiny_model(ds), tc);
  auto init = num::derive_rng(tc.seed, "init");
  const auto m0 = model::init_model(tiny_model(ds), init);
  EXPECT_EQ(res.best.model, m0);
  for (const auto& e : res.log.epochs) EXPECT_EQ(e.val, res.log.initial_val);
}

TEST(Train, SameSeedSameLogAndCheckpoint) {
  const auto ds = tiny_dataset();
  const auto a = train::train(ds, tiny_model(ds), tiny_train());
  const auto b = train::train(ds, tiny_model(ds), tiny_train());
  EXPECT_EQ(train::log_to_json(a.log).dump(), train::log_to_json(b.log).dump());
  EXPECT_EQ(a.best, b.best);
  auto tc = tiny_train();
  tc.seed = 4;
  const auto c = train::train(ds, tiny_model(ds), tc);
  EXPECT_NE(a.best.model, c.best.model);
}

TEST(Train, BestEpochHasLowestValidationLoss) {
  const auto ds = tiny_dataset();
  auto tc = tiny_train();
  tc.epochs = 6;
  const auto res = train::train(ds, tiny_model(ds), tc);
  ASSERT_EQ(res.log.epochs.size(), 6u);
  double best = res.log.initial_val.total;
  for (const auto& e : res.log.epochs) best = std::min(best, e.val.total);
  EXPECT_DOUBLE_EQ(res.log.best_val_total(), best);
  EXPECT_EQ(res.best.epoch, res.log.best_epoch);
  EXPECT_DOUBLE_EQ(train::validate(res.best, ds, data::Split::kVal).total, best);
}

TEST(Train, EmptySplitIsConfigError) {
  auto ds = tiny_dataset();
  for (auto& it : ds.manifest.items)
    if (it.split == data::Split::kVal) it.split = data::Split::kTrain;
  EXPECT_THROW(train::train(ds, tiny_model(ds), tiny_train()), duet::ConfigError);
}

TEST(Checkpoint, RoundTripValidatesBitwise) {
  const auto ds = tiny_dataset();
  const auto dir = testutil::temp_dir("ckpt");
  const auto res = train::train(ds, tiny_model(ds), tiny_train(), dir);
  const auto path = train::resolve_checkpoint_path(dir);
  EXPECT_EQ(path.filename(), "best.ckpt");
  const auto back = train::load_checkpoint(path);
  EXPECT_EQ(back, res.best);
  EXPECT_EQ(train::validate(back, ds, data::Split::kVal),
            train::validate(res.best, ds, data::Split::kVal));
  train::save_checkpoint(dir / "again.ckpt", back);
  EXPECT_EQ(testutil::read_file(dir / "again.ckpt"), testutil::read_file(path));
  EXPECT_EQ(train::resolve_checkpoint_path(dir / "best"), path);
}

TEST(Checkpoint, CorruptFileIsFormatError) {
  const auto dir = testutil::temp_dir("ckpt-bad");
  const auto ds = tiny_dataset();
  auto tc = tiny_train();
  tc.epochs = 1;
  train::train(ds, tiny_model(ds), tc, dir);
  std::filesystem::resize_file(dir / "best.ckpt", 40);
  EXPECT_THROW(train::load_checkpoint(dir / "best.ckpt"), duet::FormatError);
}

TEST(Checkpoint, CompatibilityCheck) {
  const auto ds = tiny_dataset();
  auto mc = tiny_model(ds);
  EXPECT_NO_THROW(train::check_compatible(mc, ds.manifest.header));
  mc.video_input_dim += 1;
  EXPECT_THROW(train::check_compatible(mc, ds.manifest.header), duet::CompatibilityError);
}

TEST(Validate, RunTwiceIdentical) {
  const auto ds = tiny_dataset();
  auto tc = tiny_train();
  tc.epochs = 1;
  const auto res = train::train(ds, tiny_model(ds), tc);
  EXPECT_EQ(train::validate(res.best, ds, data::Split::kTest),
            train::validate(res.best, ds, data::Split::kTest));
}

TEST(Config, ValidationAndJson) {
  auto tc = tiny_train();
  nlohmann::json j = tc;
  EXPECT_EQ(j.get<train::TrainConfig>(), tc);
  tc.temperature = 0.0;
  EXPECT_THROW(tc.validate(), duet::ConfigError);
  tc = tiny_train();
  tc.train_alpha = 1.5;
  EXPECT_ANY_THROW(tc.validate());
}
