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
#include <random>

#include "duet/errors.hpp"
#include "duet/losses/contrastive.hpp"
#include "duet/numcore/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace num = duet::num;
namespace loss = duet::loss;
using loss::Direction;
using num::Matrix;

namespace {

double info(const Matrix& a, const Matrix& v, Direction d, double tau) {
  return loss::infonce_directional(a, v, d, tau);
}

double sup(const Matrix& a, const Matrix& v, const std::vector<int>& y, Direction d, double tau) {
  return loss::supcon_directional(a, v, y, d, tau);
}

}  // namespace

TEST(InfoNCE, SingleItemIsZero) {
  const Matrix a{{0.6, 0.8}};
  EXPECT_DOUBLE_EQ(info(a, a, Direction::kAudioToVideo, 0.1), 0.0);
}

TEST(InfoNCE, AllEqualIsLogN) {
  const Matrix a(4, 3, 0.5);
  EXPECT_NEAR(info(a, a, Direction::kAudioToVideo, 0.1), std::log(4.0), 1e-9);
  EXPECT_NEAR(info(a, a, Direction::kVideoToAudio, 1.0), std::log(4.0), 1e-9);
}

TEST(InfoNCE, TwoByTwoHand) {
  const Matrix e{{1, 0}, {0, 1}};
  EXPECT_NEAR(info(e, e, Direction::kAudioToVideo, 1.0), std::log(1 + std::exp(-1.0)), 1e-12);
}

TEST(InfoNCE, RejectsNonPositiveTemperature) {
  const Matrix e{{1, 0}};
  EXPECT_THROW(info(e, e, Direction::kAudioToVideo, 0.0), duet::ParameterError);
  EXPECT_THROW(info(e, e, Direction::kAudioToVideo, -1.0), duet::ParameterError);
}

TEST(SupCon, TrivialCases) {
  const Matrix a{{1, 0}};
  EXPECT_DOUBLE_EQ(sup(a, a, {3}, Direction::kAudioToVideo, 0.1), 0.0);
  const Matrix same(4, 2, 1.0);
  EXPECT_NEAR(sup(same, same, {1, 1, 1, 1}, Direction::kAudioToVideo, 0.1), std::log(4.0), 1e-9);
}

TEST(SupCon, ThreeItemHandOracle) {
  const Matrix e{{1, 0}, {1, 0}, {0, 1}};
  const auto rows = testutil::to_rows(e);
  const double want = oracle::supcon(rows, rows, {0, 0, 1}, 1.0);
  EXPECT_NEAR(sup(e, e, {0, 0, 1}, Direction::kAudioToVideo, 1.0), want, 1e-10);
  // anchor 0 and 1: -[log(e/(2e+1)) * 2]/2, anchor 2: -log(e/(2+e))
  const double a01 = -std::log(std::exp(1.0) / (2 * std::exp(1.0) + 1));
  const double a2 = -std::log(std::exp(1.0) / (2 + std::exp(1.0)));
  EXPECT_NEAR(want, (2 * a01 + a2) / 3, 1e-12);
}

TEST(SupCon, AnchorsWithoutPositivesAreSkippedAndCounted) {
  num::Tape t;
  const Matrix e{{1, 0}, {0, 1}, {0.6, 0.8}};
  std::size_t skipped = 0;
  const std::vector<int> anchor_labels{0, 1, 5};
  const std::vector<int> cand_labels{0, 1, 1};
  const auto v = loss::supcon(t.constant(e), t.constant(e), anchor_labels, cand_labels, 1.0, &skipped);
  EXPECT_EQ(skipped, 1u);
  EXPECT_TRUE(std::isfinite(v.value().item()));
}

TEST(Symmetrize, Arithmetic) {
  EXPECT_DOUBLE_EQ(loss::symmetrize(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(loss::symmetrize(0.7, 0.7), 0.7);
  EXPECT_NEAR(loss::symmetrize(0.2, 0.4), 0.3, 1e-15);
}

TEST(Oracle, RandomBatchesMatchScalarLoops) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(1, 8);
  const double taus[] = {0.05, 0.1, 1.0};
  int batches = 0;
  for (int trial = 0; trial < 40; ++trial) {
    for (double tau : taus) {
      const std::size_t n = static_cast<std::size_t>(nd(rng));
      const auto a = oracle::normalized(oracle::random_rows(n, 5, rng));
      const auto v = oracle::normalized(oracle::random_rows(n, 5, rng));
      std::uniform_int_distribution<int> cd(0, 2);
      std::vector<int> y(n);
      for (auto& l : y) l = cd(rng);
      const Matrix A = testutil::to_matrix(a);
      const Matrix V = testutil::to_matrix(v);
      EXPECT_NEAR(info(A, V, Direction::kAudioToVideo, tau), oracle::infonce(a, v, tau), 1e-10);
      EXPECT_NEAR(info(A, V, Direction::kVideoToAudio, tau), oracle::infonce(v, a, tau), 1e-10);
      EXPECT_NEAR(sup(A, V, y, Direction::kAudioToVideo, tau), oracle::supcon(a, v, y, tau), 1e-10);
      EXPECT_NEAR(sup(A, V, y, Direction::kVideoToAudio, tau), oracle::supcon(v, a, y, tau), 1e-10);
      ++batches;
    }
  }
  EXPECT_GE(batches, 100);
}

TEST(TotalLoss, SingleItemIsZero) {
  duet::model::EmbeddingSet e;
  const Matrix one{{0.6, 0.8}};
  e.q_ssl_audio = e.q_sup_audio = e.q_ssl_video = e.q_sup_video = one;
  e.u_audio = e.v_audio = e.u_video = e.v_video = e.z_audio = e.z_video = one;
  const auto b = loss::total_loss(e, std::vector<int>{0}, 0.1);
  EXPECT_EQ(b, loss::LossBreakdown{});
}

TEST(TotalLoss, SixPairsThreeClassesMatchOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto R = [&] { return oracle::normalized(oracle::random_rows(6, 4, rng)); };
    const auto qsa = R(), qua = R(), qsv = R(), quv = R(), za = R(), zv = R();
    const std::vector<int> y{0, 1, 2, 0, 1, 2};
    duet::model::EmbeddingSet e;
    e.q_ssl_audio = testutil::to_matrix(qsa);
    e.q_sup_audio = testutil::to_matrix(qua);
    e.q_ssl_video = testutil::to_matrix(qsv);
    e.q_sup_video = testutil::to_matrix(quv);
    e.z_audio = testutil::to_matrix(za);
    e.z_video = testutil::to_matrix(zv);
    e.u_audio = e.v_audio = e.z_audio;
    e.u_video = e.v_video = e.z_video;
    const loss::LossWeights w{0.5, 2.0, 1.5, 0.25};
    const auto b = loss::total_loss(e, y, 0.1, w);
    const double ssl_z = oracle::sym_infonce(za, zv, 0.1);
    const double sup_z = oracle::sym_supcon(za, zv, y, 0.1);
    const double ssl_h = oracle::sym_infonce(qsa, qsv, 0.1);
    const double sup_h = oracle::sym_supcon(qua, quv, y, 0.1);
    EXPECT_NEAR(b.ssl_z, ssl_z, 1e-10);
    EXPECT_NEAR(b.sup_z, sup_z, 1e-10);
    EXPECT_NEAR(b.ssl_h, ssl_h, 1e-10);
    EXPECT_NEAR(b.sup_h, sup_h, 1e-10);
    EXPECT_NEAR(b.total, 0.5 * ssl_z + 2.0 * sup_z + 1.5 * ssl_h + 0.25 * sup_h, 1e-10);
  }
}

TEST(LossWeights, JsonRoundTrip) {
  const loss::LossWeights w{0.0, 1.0, 0.5, 0.0};
  nlohmann::json j = w;
  EXPECT_EQ(j.get<loss::LossWeights>(), w);
}
