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
#include "duet/numcore/adamw.hpp"
#include "duet/numcore/gradcheck.hpp"
#include "duet/numcore/matrix.hpp"
#include "duet/numcore/ops.hpp"
#include "duet/numcore/random.hpp"
#include "duet/numcore/tape.hpp"
#include "grad_suite.hpp"

namespace num = duet::num;
using num::Matrix;
using num::Tape;
using num::Var;

TEST(Matrix, MatmulIdentity) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(num::matmul(a, Matrix::identity(2)), a);
  EXPECT_EQ(num::matmul(Matrix::identity(2), Matrix{{5}, {7}}), (Matrix{{5}, {7}}));
}

TEST(Matrix, MatmulHand) {
  EXPECT_EQ(num::matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}}), (Matrix{{3}, {7}}));
}

TEST(Matrix, MatmulShapeErrorNamesBothShapes) {
  try {
    num::matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL();
  } catch (const duet::ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matrix, MatmulBtAndAtAgreeWithTranspose) {
  std::mt19937_64 rng(3);
  const Matrix a = testutil::random_matrix(4, 5, rng);
  const Matrix b = testutil::random_matrix(3, 5, rng);
  EXPECT_LT(num::max_abs_diff(num::matmul_bt(a, b), num::matmul(a, num::transpose(b))), 1e-14);
  const Matrix c = testutil::random_matrix(4, 2, rng);
  EXPECT_LT(num::max_abs_diff(num::matmul_at(a, c), num::matmul(num::transpose(a), c)), 1e-14);
}

TEST(Ops, Relu) {
  EXPECT_EQ(num::relu(Matrix{{-1, 0, 2}}), (Matrix{{0, 0, 2}}));
  const Matrix pos{{0.5, 1, 2}};
  EXPECT_EQ(num::relu(pos), pos);
}

TEST(Ops, ReluGradient) {
  Tape t;
  Var x = t.variable(Matrix{{-1, 2}});
  Var y = num::weighted_sum(num::relu(x), Matrix{{1, 1}});
  t.backward(y);
  EXPECT_EQ(t.grad(x), (Matrix{{0, 1}}));
}

TEST(Ops, DropoutEvalIsIdentity) {
  Tape t;
  num::Rng rng(1);
  const Matrix x{{1, -2, 3}};
  EXPECT_EQ(num::dropout(t.constant(x), 0.5, num::Mode::kEval, rng).value(), x);
  EXPECT_EQ(num::dropout(t.constant(x), 0.0, num::Mode::kTrain, rng).value(), x);
}

TEST(Ops, DropoutScalesSurvivors) {
  Tape t;
  num::Rng rng(42);
  const Matrix y = num::dropout(t.constant(Matrix{{1, 1, 1, 1}}), 0.5, num::Mode::kTrain, rng).value();
  for (double v : y.data()) EXPECT_TRUE(v == 0.0 || v == 2.0) << v;
}

TEST(Ops, DropoutRejectsBadProbability) {
  Tape t;
  num::Rng rng(1);
  EXPECT_THROW(num::dropout(t.constant(Matrix{{1}}), 1.0, num::Mode::kTrain, rng), duet::ParameterError);
  EXPECT_THROW(num::dropout(t.constant(Matrix{{1}}), -0.1, num::Mode::kTrain, rng), duet::ParameterError);
}

TEST(Ops, L2Normalize) {
  const Matrix y = num::l2_normalize_rows(Matrix{{3, 4}, {1, 1}});
  EXPECT_NEAR(y(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(y(0, 1), 0.8, 1e-15);
  EXPECT_NEAR(y(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
  const Matrix unit{{0, 1}};
  EXPECT_EQ(num::l2_normalize_rows(unit), unit);
  EXPECT_THROW(num::l2_normalize_rows(Matrix{{0, 0}}), duet::DegenerateVectorError);
}

TEST(Ops, LogSoftmax) {
  Matrix y = num::log_softmax_rows(Matrix{{0, 0}});
  EXPECT_NEAR(y(0, 0), -std::log(2.0), 1e-15);
  y = num::log_softmax_rows(Matrix{{1000, 0}});
  EXPECT_NEAR(y(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(y(0, 1), -1000.0, 1e-9);
  EXPECT_TRUE(y.all_finite());
  y = num::log_softmax_rows(Matrix{{1, 2, 3}});
  EXPECT_NEAR(y(0, 0), -2.4076, 1e-4);
  EXPECT_NEAR(y(0, 1), -1.4076, 1e-4);
  EXPECT_NEAR(y(0, 2), -0.4076, 1e-4);
}

TEST(Tape, GradientsAccumulateAcrossUses) {
  Tape t;
  Var x = t.variable(Matrix{{2}});
  Var y = num::add(num::scale(x, 3.0), num::scale(x, 4.0));
  t.backward(y);
  EXPECT_DOUBLE_EQ(t.grad(x).item(), 7.0);
}

TEST(Tape, ConstantsReceiveNoGradient) {
  Tape t;
  Var c = t.constant(Matrix{{2}});
  Var x = t.variable(Matrix{{1}});
  t.backward(num::add(c, x));
  EXPECT_FALSE(t.requires_grad(c));
  EXPECT_DOUBLE_EQ(t.grad(c).item(), 0.0);
  EXPECT_DOUBLE_EQ(t.grad(x).item(), 1.0);
}

TEST(Tape, BackwardVisitsInReverseOrder) {
  Tape t;
  Var x = t.variable(Matrix{{1}});
  Var a = num::scale(x, 2.0);
  Var b = num::exp(a);
  t.backward(b);
  const auto& sweep = t.last_sweep();
  ASSERT_FALSE(sweep.empty());
  for (std::size_t i = 1; i < sweep.size(); ++i) EXPECT_GT(sweep[i - 1], sweep[i]);
}

TEST(AdamW, ZeroGradientZeroDecayIsFixedPoint) {
  Matrix p{{1.5, -2}};
  std::vector<Matrix*> params{&p};
  num::AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  auto st = num::AdamWState::for_params(std::vector<const Matrix*>{&p}, cfg);
  const std::vector<Matrix> g{Matrix(1, 2)};
  num::adamw_step(params, g, st);
  EXPECT_EQ(p, (Matrix{{1.5, -2}}));
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  Matrix p{{0.0}};
  std::vector<Matrix*> params{&p};
  num::AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  auto st = num::AdamWState::for_params(std::vector<const Matrix*>{&p}, cfg);
  num::adamw_step(params, std::vector<Matrix>{Matrix{{1.0}}}, st);
  EXPECT_NEAR(p.item(), -0.001, 1e-8);
}

TEST(AdamW, DecoupledDecay) {
  Matrix p{{2.0}};
  std::vector<Matrix*> params{&p};
  num::AdamWConfig cfg;
  cfg.weight_decay = 0.1;
  cfg.learning_rate = 0.01;
  auto st = num::AdamWState::for_params(std::vector<const Matrix*>{&p}, cfg);
  for (int i = 0; i < 3; ++i) num::adamw_step(params, std::vector<Matrix>{Matrix{{0.0}}}, st);
  EXPECT_NEAR(p.item(), 2.0 * std::pow(1.0 - 0.01 * 0.1, 3), 1e-14);
}

TEST(AdamW, ShapeMismatchThrows) {
  Matrix p{{1.0, 2.0}};
  std::vector<Matrix*> params{&p};
  auto st = num::AdamWState::for_params(std::vector<const Matrix*>{&p}, {});
  EXPECT_THROW(num::adamw_step(params, std::vector<Matrix>{Matrix{{1.0}}}, st), duet::ShapeError);
}

TEST(GradCheck, Quadratic) {
  const auto r = num::check_gradients(
      [](Tape&, std::span<const Var> p) { return num::weighted_sum(num::matmul(p[0], p[0]), Matrix{{1}}); },
      {Matrix{{3.0}}});
  EXPECT_NEAR(r.analytic[0].item(), 6.0, 1e-12);
  EXPECT_NEAR(r.numeric[0].item(), 6.0, 1e-7);
}

TEST(GradCheck, ConstantFunction) {
  const auto r = num::check_gradients(
      [](Tape& t, std::span<const Var>) { return t.constant(Matrix{{4.0}}); }, {Matrix{{1.0, 2.0}}});
  EXPECT_EQ(r.analytic[0], Matrix(1, 2));
  EXPECT_EQ(r.numeric[0], Matrix(1, 2));
}

TEST(GradCheck, NonFiniteReportsNumericalError) {
  EXPECT_THROW(num::check_gradients(
                   [](Tape&, std::span<const Var> p) {
                     return num::weighted_sum(num::exp(p[0]), Matrix{{1}});
                   },
                   {Matrix{{1000.0}}}),
               duet::NumericalError);
}

TEST(GradSuite, AllPrimitivesAndObjectiveOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& c : gradsuite::run(seed)) {
      EXPECT_LE(c.max_rel_error, 1e-5) << c.name << " seed " << seed;
    }
  }
}

TEST(Random, DerivedStreamsDifferAndRepeat) {
  auto a = num::derive_rng(7, "init");
  auto b = num::derive_rng(7, "dropout");
  auto c = num::derive_rng(7, "init");
  const auto va = a();
  EXPECT_NE(va, b());
  EXPECT_EQ(va, c());
  EXPECT_EQ(num::fnv1a64(""), 0xcbf29ce484222325ULL);
}
