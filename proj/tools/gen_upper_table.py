#!/usr/bin/env python3
"""Regenerates src/unicode_upper_table.inc (General_Category=Lu ranges)."""
import sys
import unicodedata

ranges = []
start = None
for cp in range(0x110000):
    is_upper = unicodedata.category(chr(cp)) == "Lu"
    if is_upper and start is None:
        start = cp
    elif not is_upper and start is not None:
        ranges.append((start, cp - 1))
        start = None
if start is not None:
    ranges.append((start, 0x10FFFF))

out = sys.stdout
out.write(f"// Generated by tools/gen_upper_table.py (Unicode {unicodedata.unidata_version}). Do not edit.\n")
out.write("// clang-format off\n")
for lo, hi in ranges:
    out.write(f"{{0x{lo:05X}, 0x{hi:05X}}},\n")
