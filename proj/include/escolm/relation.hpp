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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace escolm {

// ERP target. The integer encoding is part of the instance file format.
enum class Relation : std::uint8_t { kRandom = 0, kLinked = 1, kGrouped = 2 };

inline constexpr std::array<Relation, 3> kAllRelations = {Relation::kRandom, Relation::kLinked,
                                                         Relation::kGrouped};

constexpr std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kRandom:
      return "random";
    case Relation::kLinked:
      return "linked";
    case Relation::kGrouped:
      return "grouped";
  }
  return "?";
}

constexpr int to_int(Relation r) { return static_cast<int>(r); }

inline std::optional<Relation> relation_from_string(std::string_view s) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

inline std::optional<Relation> relation_from_int(long long v) {
  if (v < 0 || v > 2) return std::nullopt;
  return static_cast<Relation>(v);
}

}  // namespace escolm
