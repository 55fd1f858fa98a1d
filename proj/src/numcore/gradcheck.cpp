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


#include "duet/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "duet/errors.hpp"

namespace duet::num {

namespace {

double evaluate(const ScalarFn& f, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.constant(p));
  return f(tape, vars).value().item();
}

std::string where(std::size_t param, std::size_t index) {
  return "parameter " + std::to_string(param) + " entry " + std::to_string(index);
}

}  // namespace

GradCheckReport check_gradients(const ScalarFn& f, const std::vector<Matrix>& params,
                                double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("gradient check epsilon must be positive");
  GradCheckReport report;

  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params) vars.push_back(tape.variable(p));
  const Var out = f(tape, vars);
  if (!std::isfinite(out.value().item())) throw NumericalError("objective is non-finite");
  tape.backward(out);
  for (const auto& v : vars) report.analytic.push_back(v.grad());

  std::vector<Matrix> probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix numeric(params[p].rows(), params[p].cols());
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double base = params[p][i];
      double plus = 0.0;
      double minus = 0.0;
      try {
        probe[p][i] = base + epsilon;
        plus = evaluate(f, probe);
        probe[p][i] = base - epsilon;
        minus = evaluate(f, probe);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " while perturbing " + where(p, i));
      }
      probe[p][i] = base;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw NumericalError("non-finite objective while perturbing " + where(p, i));
      }
      numeric[i] = (plus - minus) / (2.0 * epsilon);
      const double a = report.analytic[p][i];
      if (!std::isfinite(a)) throw NumericalError("non-finite analytic gradient at " + where(p, i));
      const double err = std::abs(a - numeric[i]) / std::max(1.0, std::abs(numeric[i]));
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = p;
        report.worst_index = i;
      }
    }
    report.numeric.push_back(std::move(numeric));
  }
  return report;
}

}  // namespace duet::num
