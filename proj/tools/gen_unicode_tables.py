#!/usr/bin/env python3
# Copyright (c) 2026, the earlybo authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates include/earlybo/detail/unicode_tables.hpp from the Python
# unicodedata database: canonical (base, mark) -> composed pairs and the
# full case-folding map. Run from the repository root.

import sys
import unicodedata

MAX_CP = 0x110000


def composition_pairs():
    pairs = []
    for cp in range(MAX_CP):
        ch = chr(cp)
        decomp = unicodedata.decomposition(ch)
        if not decomp or decomp.startswith("<"):
            continue
        parts = decomp.split()
        if len(parts) != 2:
            continue
        base, mark = (int(p, 16) for p in parts)
        # NFC round-trip filters out composition exclusions.
        if unicodedata.normalize("NFC", chr(base) + chr(mark)) == ch:
            pairs.append((base, mark, cp))
    pairs.sort()
    return pairs


def casefold_entries():
    entries = []
    for cp in range(MAX_CP):
        ch = chr(cp)
        folded = ch.casefold()
        if folded != ch:
            entries.append((cp, [ord(c) for c in folded]))
    return entries


def main():
    pairs = composition_pairs()
    folds = casefold_entries()
    max_fold = max(len(f) for _, f in folds)

    out = sys.stdout
    out.write(
        "// Copyright (c) 2026, the earlybo authors\n"
        "// SPDX-License-Identifier: Apache-2.0\n"
        "//\n"
        "// Generated by tools/gen_unicode_tables.py (Unicode data via Python\n"
        f"// unicodedata {unicodedata.unidata_version}). Do not edit by hand.\n"
        "\n"
        "#pragma once\n"
        "\n"
        "#include <cstddef>\n"
        "#include <cstdint>\n"
        "\n"
        "namespace earlybo::detail {\n"
        "\n"
    )
    out.write("struct ComposePair {\n"
              "  char32_t base;\n"
              "  char32_t mark;\n"
              "  char32_t composed;\n"
              "};\n\n")
    out.write(f"inline constexpr ComposePair kCompositionPairs[{len(pairs)}] = {{\n")
    for base, mark, comp in pairs:
        out.write(f"    {{0x{base:04X}, 0x{mark:04X}, 0x{comp:04X}}},\n")
    out.write("};\n\n")

    out.write("struct CaseFold {\n"
              "  char32_t cp;\n"
              f"  char32_t folded[{max_fold}];\n"
              "  std::uint8_t length;\n"
              "};\n\n")
    out.write(f"inline constexpr CaseFold kCaseFolds[{len(folds)}] = {{\n")
    for cp, folded in folds:
        padded = folded + [0] * (max_fold - len(folded))
        body = ", ".join(f"0x{c:04X}" for c in padded)
        out.write(f"    {{0x{cp:04X}, {{{body}}}, {len(folded)}}},\n")
    out.write("};\n\n")
    out.write("}  // namespace earlybo::detail\n")


if __name__ == "__main__":
    main()
