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
#include <random>

#include "duet/numcore/matrix.hpp"
#include "duet/numcore/tape.hpp"

namespace duet::num {

enum class Mode { kTrain, kEval };

using Rng = std::mt19937_64;

// Rows with a Euclidean norm below this are rejected by l2_normalize_rows.
inline constexpr double kMinRowNorm = 1e-12;

// Value-level kernels. The differentiable ops below use exactly these, so a
// tape forward and a plain forward agree bitwise.
Matrix add_row(const Matrix& x, const Matrix& bias);
Matrix relu(const Matrix& x);
Matrix l2_normalize_rows(const Matrix& x);
Matrix log_softmax_rows(const Matrix& x);
// a*x + b*y, elementwise.
Matrix axpby(double a, const Matrix& x, double b, const Matrix& y);
// Inverted dropout mask: zeros with probability p, 1/(1-p) elsewhere.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

// Differentiable ops.
Var matmul(const Var& a, const Var& b);
Var matmul_bt(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var add_row(const Var& x, const Var& bias);
Var scale(const Var& x, double s);
Var axpby(double a, const Var& x, double b, const Var& y);
Var relu(const Var& x);
Var exp(const Var& x);
Var dropout(const Var& x, double p, Mode mode, Rng& rng);
Var l2_normalize_rows(const Var& x);
Var log_softmax_rows(const Var& x);
// sum_ij weights(i,j) * x(i,j) as a 1x1 value; weights are constant.
Var weighted_sum(const Var& x, const Matrix& weights);
// out(i, d) = sum_l w(0, l) * stacked(i, l * D + d), where stacked holds L
// blocks of D columns per row. w is 1xL, stacked is constant.
Var layer_mix(const Var& w, const Matrix& stacked);

}  // namespace duet::num
