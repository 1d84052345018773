// Copyright 2026 The aircloth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>

#include "aircloth/nn.hpp"

namespace aircloth {

struct GradCheckReport {
  double max_rel_error = 0.0;
  int parameters = 0;
};

// Central finite differences over every parameter vs the analytic gradient.
// `loss_backward` must populate ps.grads (zeroing first); `loss_forward`
// must evaluate the same loss without touching gradients.
inline GradCheckReport check_gradients(
    ParamStore<double>& ps, const std::function<double()>& loss_backward,
    const std::function<double()>& loss_forward, double h = 1e-5) {
  GradCheckReport report;
  loss_backward();
  const std::vector<double> analytic = ps.grads();
  std::vector<double>& params = ps.values();
  report.parameters = static_cast<int>(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double lp = loss_forward();
    params[i] = saved - h;
    const double lm = loss_forward();
    params[i] = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double denom =
        std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    report.max_rel_error =
        std::max(report.max_rel_error, std::abs(fd - analytic[i]) / denom);
  }
  return report;
}

}  // namespace aircloth
