// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Stable 64-bit hashing. std::hash is implementation-defined, so anything
// persisted or used for seed derivation goes through these instead.

#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace earlybo::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class StableHash {
 public:
  StableHash& mix(std::uint64_t v) {
    state_ = splitmix64(state_ ^ v);
    return *this;
  }

  StableHash& mix(std::int64_t v) { return mix(static_cast<std::uint64_t>(v)); }
  StableHash& mix(int v) { return mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }

  StableHash& mix(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    return mix(bits);
  }

  StableHash& mix(std::string_view s) {
    // FNV-1a over the bytes, then folded into the running state.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return mix(h);
  }

  [[nodiscard]] std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0x3c6ef372fe94f82aULL;
};

template <typename... Parts>
std::uint64_t stable_hash(const Parts&... parts) {
  StableHash h;
  (h.mix(parts), ...);
  return h.value();
}

}  // namespace earlybo::detail
