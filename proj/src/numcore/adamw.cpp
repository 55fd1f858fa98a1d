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


#include "duet/numcore/adamw.hpp"

#include <cmath>

#include "duet/errors.hpp"

namespace duet::num {

AdamWState AdamWState::for_params(std::span<const Matrix* const> params, AdamWConfig config) {
  AdamWState s;
  s.config = config;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows(), p->cols());
    s.second_moment.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adamw_step: " + std::to_string(params.size()) + " params, " +
                     std::to_string(grads.size()) + " grads, " +
                     std::to_string(state.first_moment.size()) + " moment buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.first_moment[i]) ||
        !params[i]->same_shape(state.second_moment[i])) {
      throw ShapeError("adamw_step: parameter " + std::to_string(i) + " has shape " +
                       params[i]->shape_string() + " but gradient " + grads[i].shape_string() +
                       " and moments " + state.first_moment[i].shape_string());
    }
  }

  const AdamWConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - c.learning_rate * c.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = grads[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] *= decay;
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace duet::num
