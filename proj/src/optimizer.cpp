// Copyright 2026 The escolm Authors.
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

#include "escolm/optimizer.hpp"

#include <cmath>

#include "escolm/errors.hpp"

namespace escolm {

std::uint64_t LrSchedule::warmup_steps() const {
  const double exact = warmup_ratio * static_cast<double>(total_steps);
  // 0.06 * 1000 is 60.000000000000007 in binary; snap near-integers first.
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::ceil(exact));
}

double LrSchedule::lr(std::uint64_t step) const {
  if (step >= total_steps) return 0.0;
  const std::uint64_t warmup = warmup_steps();
  if (step == warmup) return peak_lr;
  if (step < warmup) {
    return peak_lr * (static_cast<double>(step) / static_cast<double>(warmup));
  }
  return peak_lr * (static_cast<double>(total_steps - step) /
                    static_cast<double>(total_steps - warmup));
}

OptimizerState OptimizerState::create(std::size_t parameter_count, const LrSchedule& schedule,
                                      const AdamWHyper& hyper) {
  OptimizerState s;
  s.m.assign(parameter_count, 0.0);
  s.v.assign(parameter_count, 0.0);
  s.schedule = schedule;
  s.hyper = hyper;
  return s;
}

double adamw_update(std::span<double> values, std::span<const double> grads,
                    const std::vector<bool>& decay_mask, OptimizerState& state) {
  if (values.size() != grads.size() || values.size() != state.m.size() ||
      values.size() != state.v.size() || values.size() != decay_mask.size()) {
    throw ShapeError("optimizer state does not match the parameters");
  }
  if (state.step >= state.schedule.total_steps) {
    throw ScheduleExhausted("all " + std::to_string(state.schedule.total_steps) +
                            " scheduled steps are done");
  }
  const std::uint64_t t = state.step + 1;
  const double lr = state.schedule.lr(t);
  const AdamWHyper& h = state.hyper;
  const double bias1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (decay_mask[i]) values[i] -= lr * h.weight_decay * values[i];
    const double g = grads[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    values[i] -= lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
  state.step = t;
  return lr;
}

TrainStepLog train_step(Parameters& params, OptimizerState& state,
                        std::span<const MaskedInstance> batch, const LossOptions& options,
                        Rng* dropout_rng) {
  if (state.step >= state.schedule.total_steps) {
    throw ScheduleExhausted("all " + std::to_string(state.schedule.total_steps) +
                            " scheduled steps are done");
  }
  Gradients grads = backward(params, batch, options, dropout_rng);
  TrainStepLog log;
  log.lr = adamw_update(params.values(), grads.values, params.decay_mask(), state);
  log.step = state.step;
  log.stats = grads.stats;
  return log;
}

}  // namespace escolm
