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


#include "duet/numcore/ops.hpp"

#include <algorithm>
#include <cmath>

#include "duet/errors.hpp"

namespace duet::num {

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

Matrix add_row(const Matrix& x, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("add_row: bias " + bias.shape_string() + " does not broadcast over " +
                     x.shape_string());
  }
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
  return out;
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix l2_normalize_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = out.row(r);
    double ss = 0.0;
    for (double v : row) ss += v * v;
    const double norm = std::sqrt(ss);
    if (!(norm >= kMinRowNorm)) {
      throw DegenerateVectorError("l2_normalize_rows: row " + std::to_string(r) +
                                  " has norm below 1e-12");
    }
    for (auto& v : row) v /= norm;
  }
  return out;
}

Matrix log_softmax_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (auto& v : row) v -= lse;
  }
  return out;
}

Matrix axpby(double a, const Matrix& x, double b, const Matrix& y) {
  require_same_shape("axpby", x, y);
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ParameterError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
  Matrix mask(rows, cols, 1.0);
  if (p == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& m : mask.data()) m = u(rng) < p ? 0.0 : keep_scale;
  return mask;
}

Var matmul(const Var& a, const Var& b) {
  Matrix out = matmul(a.value(), b.value());
  return a.tape().record("matmul", std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, matmul_bt(g, b.value()));
    if (t.requires_grad(b)) t.accumulate(b, matmul_at(a.value(), g));
  });
}

Var matmul_bt(const Var& a, const Var& b) {
  Matrix out = matmul_bt(a.value(), b.value());
  return a.tape().record("matmul_bt", std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, matmul(g, b.value()));
    if (t.requires_grad(b)) t.accumulate(b, matmul_at(g, a.value()));
  });
}

Var add(const Var& a, const Var& b) {
  Matrix out = axpby(1.0, a.value(), 1.0, b.value());
  return a.tape().record("add", std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var add_row(const Var& x, const Var& bias) {
  Matrix out = add_row(x.value(), bias.value());
  return x.tape().record("add_row", std::move(out), {x, bias}, [x, bias](Tape& t, const Matrix& g) {
    t.accumulate(x, g);
    if (t.requires_grad(bias)) {
      Matrix gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
      t.accumulate(bias, gb);
    }
  });
}

Var scale(const Var& x, double s) {
  Matrix out = x.value();
  for (auto& v : out.data()) v *= s;
  return x.tape().record("scale", std::move(out), {x}, [x, s](Tape& t, const Matrix& g) {
    Matrix gx = g;
    for (auto& v : gx.data()) v *= s;
    t.accumulate(x, gx);
  });
}

Var axpby(double a, const Var& x, double b, const Var& y) {
  Matrix out = axpby(a, x.value(), b, y.value());
  return x.tape().record("axpby", std::move(out), {x, y}, [a, x, b, y](Tape& t, const Matrix& g) {
    Matrix gx(g.rows(), g.cols());
    Matrix gy(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] = a * g[i];
      gy[i] = b * g[i];
    }
    t.accumulate(x, gx);
    t.accumulate(y, gy);
  });
}

Var relu(const Var& x) {
  Matrix out = relu(x.value());
  return x.tape().record("relu", std::move(out), {x}, [x](Tape& t, const Matrix& g) {
    const Matrix& in = x.value();
    Matrix gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] = in[i] > 0.0 ? g[i] : 0.0;
    t.accumulate(x, gx);
  });
}

Var exp(const Var& x) {
  Matrix out = x.value();
  for (auto& v : out.data()) v = std::exp(v);
  Matrix y = out;
  return x.tape().record("exp", std::move(out), {x}, [x, y = std::move(y)](Tape& t, const Matrix& g) {
    Matrix gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * y[i];
    t.accumulate(x, gx);
  });
}

Var dropout(const Var& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ParameterError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
  if (mode == Mode::kEval || p == 0.0) return x;
  Matrix mask = dropout_mask(x.rows(), x.cols(), p, rng);
  Matrix out = hadamard(x.value(), mask);
  return x.tape().record("dropout", std::move(out), {x},
                         [x, mask = std::move(mask)](Tape& t, const Matrix& g) {
                           t.accumulate(x, hadamard(g, mask));
                         });
}

Var l2_normalize_rows(const Var& x) {
  Matrix out = l2_normalize_rows(x.value());
  Matrix norms(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double ss = 0.0;
    for (double v : x.value().row(r)) ss += v * v;
    norms[r] = std::sqrt(ss);
  }
  Matrix y = out;
  return x.tape().record(
      "l2_normalize_rows", std::move(out), {x},
      [x, y = std::move(y), norms = std::move(norms)](Tape& t, const Matrix& g) {
        // dx = (g - y <y, g>) / |x|
        Matrix gx(g.rows(), g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const auto yr = y.row(r);
          const auto gr = g.row(r);
          double dot = 0.0;
          for (std::size_t c = 0; c < gr.size(); ++c) dot += yr[c] * gr[c];
          auto out_r = gx.row(r);
          for (std::size_t c = 0; c < gr.size(); ++c) out_r[c] = (gr[c] - yr[c] * dot) / norms[r];
        }
        t.accumulate(x, gx);
      });
}

Var log_softmax_rows(const Var& x) {
  Matrix out = log_softmax_rows(x.value());
  Matrix y = out;
  return x.tape().record("log_softmax_rows", std::move(out), {x},
                         [x, y = std::move(y)](Tape& t, const Matrix& g) {
                           // dx = g - softmax * rowsum(g)
                           Matrix gx(g.rows(), g.cols());
                           for (std::size_t r = 0; r < g.rows(); ++r) {
                             const auto gr = g.row(r);
                             double s = 0.0;
                             for (double v : gr) s += v;
                             const auto yr = y.row(r);
                             auto out_r = gx.row(r);
                             for (std::size_t c = 0; c < gr.size(); ++c)
                               out_r[c] = gr[c] - std::exp(yr[c]) * s;
                           }
                           t.accumulate(x, gx);
                         });
}

Var weighted_sum(const Var& x, const Matrix& weights) {
  require_same_shape("weighted_sum", x.value(), weights);
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x.value()[i];
  return x.tape().record("weighted_sum", Matrix::scalar(s), {x},
                         [x, weights](Tape& t, const Matrix& g) {
                           Matrix gx = weights;
                           const double up = g[0];
                           for (auto& v : gx.data()) v *= up;
                           t.accumulate(x, gx);
                         });
}

Var layer_mix(const Var& w, const Matrix& stacked) {
  const std::size_t layers = w.cols();
  if (w.rows() != 1 || layers == 0 || stacked.cols() % layers != 0) {
    throw ShapeError("layer_mix: weights " + w.value().shape_string() +
                     " incompatible with stacked features " + stacked.shape_string());
  }
  const std::size_t dim = stacked.cols() / layers;
  Matrix out(stacked.rows(), dim);
  const Matrix& wv = w.value();
  for (std::size_t i = 0; i < stacked.rows(); ++i) {
    const auto src = stacked.row(i);
    auto dst = out.row(i);
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t d = 0; d < dim; ++d) dst[d] += wv[l] * src[l * dim + d];
  }
  return w.tape().record("layer_mix", std::move(out), {w},
                         [w, stacked, layers, dim](Tape& t, const Matrix& g) {
                           Matrix gw(1, layers);
                           for (std::size_t i = 0; i < stacked.rows(); ++i) {
                             const auto src = stacked.row(i);
                             const auto gr = g.row(i);
                             for (std::size_t l = 0; l < layers; ++l)
                               for (std::size_t d = 0; d < dim; ++d)
                                 gw[l] += gr[d] * src[l * dim + d];
                           }
                           t.accumulate(w, gw);
                         });
}

}  // namespace duet::num
