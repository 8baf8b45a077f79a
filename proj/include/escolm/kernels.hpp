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

#include <cstddef>
#include <string_view>
#include <vector>

// Double-precision vector kernels behind the model's dense loops. Every
// variant computes the same mathematical result; SIMD variants may differ
// from the scalar reference in the last bits because they sum in a
// different order. A process uses one variant for its whole lifetime unless
// a test switches it, which keeps training runs bit-reproducible.
namespace escolm::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
};

const KernelTable& scalar_table();

// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);
std::vector<Isa> available_isas();
// Throws ConfigError when the variant is unavailable.
const KernelTable& table(Isa isa);

// Best available variant, unless ESCOLM_ISA=scalar|avx2|neon overrides it.
const KernelTable& active();
// Test hook; affects subsequent active() calls process-wide.
void set_active(Isa isa);

}  // namespace escolm::kernels
