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

#include <atomic>
#include <cstdlib>
#include <string>

#include "escolm/errors.hpp"
#include "escolm/kernels.hpp"

namespace escolm::kernels {

#if defined(ESCOLM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(ESCOLM_HAVE_NEON)
const KernelTable& neon_table();
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(ESCOLM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(ESCOLM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw ConfigError("kernel variant '" + std::string(to_string(isa)) + "' is unavailable");
  }
  switch (isa) {
#if defined(ESCOLM_HAVE_AVX2)
    case Isa::kAvx2:
      return avx2_table();
#endif
#if defined(ESCOLM_HAVE_NEON)
    case Isa::kNeon:
      return neon_table();
#endif
    default:
      return scalar_table();
  }
}

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("ESCOLM_ISA")) {
    const std::string want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == to_string(isa)) return &table(isa);
    }
    throw ConfigError("ESCOLM_ISA='" + want + "' is not one of scalar, avx2, neon");
  }
  if (isa_available(Isa::kAvx2)) return &table(Isa::kAvx2);
  if (isa_available(Isa::kNeon)) return &table(Isa::kNeon);
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial_table()};
  return ptr;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_active(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace escolm::kernels
