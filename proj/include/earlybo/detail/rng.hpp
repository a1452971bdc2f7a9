// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded uniform generator. std::uniform_real_distribution is
// implementation-defined, so unit draws are built from raw engine output
// to keep studies reproducible across standard libraries.

#pragma once

#include <cstdint>
#include <random>

namespace earlybo::detail {

class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1) with 53 bits of resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace earlybo::detail
