"""Why interleaved keys sort similar series together.

Builds a handful of series, summarizes them, and shows that neighbors in key
order are close in Euclidean distance while distant keys are far apart.

Run: python demos/01_sortable_keys.py
"""

import numpy as np

from sortsax import (
    breakpoints,
    deinterleave,
    euclidean_distance,
    interleave,
    random_walk_generate,
    summarize,
    znormalize,
)

W, B, N = 8, 4, 64

print(f"breakpoints for b={B} (standard-normal quantiles):")
print(np.round(breakpoints(B).cuts, 4), "\n")

series = [znormalize(s) for s in random_walk_generate(12, N, seed=7)]
keyed = []
for s in series:
    summary = summarize(s, W, B)
    key = interleave(summary)
    keyed.append((key, summary, s))
    assert deinterleave(key, W, B) == summary  # lossless round trip

keyed.sort(key=lambda t: t[0].value)

print(f"{'key (hex)':>18}  symbols")
for key, summary, _ in keyed:
    print(f"{key.value:#18x}  {summary.symbols}")

print("\ndistance from each series to its key-order neighbor vs. the key-order")
print("farthest series (sorting keeps similar series adjacent):")
for i in range(len(keyed) - 1):
    near = euclidean_distance(keyed[i][2], keyed[i + 1][2])
    far = euclidean_distance(keyed[i][2], keyed[-1 if i < len(keyed) - 2 else 0][2])
    marker = "<-- neighbor closer" if near < far else ""
    print(f"  #{i}: neighbor {near:6.2f}   far key {far:6.2f}  {marker}")

print("\nbyte serialization preserves order (lexicographic == numeric):")
by_bytes = sorted(k.to_bytes() for k, _, _ in keyed)
by_value = [k.to_bytes() for k, _, _ in sorted(keyed, key=lambda t: t[0].value)]
print("  match:", by_bytes == by_value)
