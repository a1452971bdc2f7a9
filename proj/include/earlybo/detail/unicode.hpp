// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal UTF-8 handling for value normalization: decode, canonical
// composition of (starter, mark) pairs, case folding, whitespace tests.
// Invalid UTF-8 bytes fall back to their Latin-1 interpretation rather
// than failing, since record files come from arbitrary scrapers.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "earlybo/detail/unicode_tables.hpp"

namespace earlybo::detail {

inline std::vector<char32_t> utf8_decode(std::string_view input) {
  std::vector<char32_t> out;
  out.reserve(input.size());
  std::size_t i = 0;
  while (i < input.size()) {
    const auto byte = static_cast<unsigned char>(input[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (byte < 0x80) {
      len = 1;
      cp = byte;
    } else if ((byte & 0xE0) == 0xC0) {
      len = 2;
      cp = byte & 0x1F;
    } else if ((byte & 0xF0) == 0xE0) {
      len = 3;
      cp = byte & 0x0F;
    } else if ((byte & 0xF8) == 0xF0) {
      len = 4;
      cp = byte & 0x07;
    }
    bool valid = len > 0 && i + len <= input.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto cont = static_cast<unsigned char>(input[i + k]);
      if ((cont & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cont & 0x3F);
      }
    }
    if (valid) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(byte);  // Latin-1 fallback
      i += 1;
    }
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline std::string utf8_encode(const std::vector<char32_t>& codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) utf8_append(out, cp);
  return out;
}

/// Canonical composition of adjacent (starter, combining mark) pairs, the
/// common case for decomposed web text.
inline std::vector<char32_t> compose_canonical(const std::vector<char32_t>& input) {
  std::vector<char32_t> out;
  out.reserve(input.size());
  for (char32_t cp : input) {
    if (!out.empty()) {
      const char32_t base = out.back();
      const auto* begin = std::begin(kCompositionPairs);
      const auto* end = std::end(kCompositionPairs);
      const auto* it = std::lower_bound(begin, end, std::pair{base, cp},
                                        [](const ComposePair& p, const std::pair<char32_t, char32_t>& key) {
                                          if (p.base != key.first) return p.base < key.first;
                                          return p.mark < key.second;
                                        });
      if (it != end && it->base == base && it->mark == cp) {
        out.back() = it->composed;
        continue;
      }
    }
    out.push_back(cp);
  }
  return out;
}

inline void casefold_append(std::vector<char32_t>& out, char32_t cp) {
  const auto* begin = std::begin(kCaseFolds);
  const auto* end = std::end(kCaseFolds);
  const auto* it = std::lower_bound(begin, end, cp,
                                    [](const CaseFold& f, char32_t key) { return f.cp < key; });
  if (it != end && it->cp == cp) {
    for (std::uint8_t k = 0; k < it->length; ++k) out.push_back(it->folded[k]);
  } else {
    out.push_back(cp);
  }
}

inline std::vector<char32_t> casefold(const std::vector<char32_t>& input) {
  std::vector<char32_t> out;
  out.reserve(input.size());
  for (char32_t cp : input) casefold_append(out, cp);
  return out;
}

inline bool is_unicode_whitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

}  // namespace earlybo::detail
