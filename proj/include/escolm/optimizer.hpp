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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "escolm/model.hpp"

namespace escolm {

// Linear warmup to peak over ceil(warmup_ratio * total_steps) steps, then
// linear decay to 0 at total_steps.
struct LrSchedule {
  double peak_lr = 1e-3;
  double warmup_ratio = 0.06;
  std::uint64_t total_steps = 1;

  std::uint64_t warmup_steps() const;
  double lr(std::uint64_t step) const;
};

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

struct OptimizerState {
  // Number of updates applied so far. Update number step+1 uses lr(step+1).
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  LrSchedule schedule;
  AdamWHyper hyper;

  static OptimizerState create(std::size_t parameter_count, const LrSchedule& schedule,
                               const AdamWHyper& hyper);
};

// One decoupled-weight-decay Adam update. Returns the learning rate used.
// Throws ScheduleExhausted once step == total_steps, ShapeError on size
// mismatch.
double adamw_update(std::span<double> values, std::span<const double> grads,
                    const std::vector<bool>& decay_mask, OptimizerState& state);

struct TrainStepLog {
  std::uint64_t step = 0;  // after the update
  double lr = 0.0;
  BatchStats stats;
};

TrainStepLog train_step(Parameters& params, OptimizerState& state,
                        std::span<const MaskedInstance> batch, const LossOptions& options = {},
                        Rng* dropout_rng = nullptr);

}  // namespace escolm
