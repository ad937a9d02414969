"""Render a query's access pattern as a terminal heat map.

Each cell is one storage page of one file; the glyph encodes what the query
did there.  Compare the approximate probe (one hot leaf) with the exact scan
(every leaf warm, raw fetches where pruning failed).

Run: python demos/06_access_heatmap.py
"""

import tempfile
from collections import Counter
from pathlib import Path

from sortsax import CTree, IndexConfig, Recorder, random_walk_generate

GLYPHS = {
    "skipped_partition": "s",
    "lower_bound_only": ".",
    "opened_partition": "o",
    "raw_fetch": "#",
}
SEVERITY = ["skipped_partition", "lower_bound_only", "opened_partition", "raw_fetch"]


def heat_map(trace):
    by_file = {}
    for e in trace.events:
        counts = by_file.setdefault(e.file, {})
        counts.setdefault(e.page, Counter())[e.kind] += 1
    lines = []
    for file, pages in sorted(by_file.items()):
        width = max(pages) + 1
        row = []
        for page in range(width):
            kinds = pages.get(page)
            if not kinds:
                row.append(" ")
                continue
            top = max(kinds, key=lambda k: SEVERITY.index(k))
            row.append(GLYPHS[top])
        lines.append(f"  {file:>12} |{''.join(row)}|")
    return "\n".join(lines)


N = 128
config = IndexConfig(n=N, w=16, b=8, page_size=16 * 1024)
work = Path(tempfile.mkdtemp(prefix="sortsax-demo-"))
recorder = Recorder()
tree = CTree.build(work / "tree", random_walk_generate(8000, N, seed=41),
                   config, recorder=recorder)
query = next(iter(random_walk_generate(1, N, seed=42)))

print("legend: o=page opened  .=page fully pruned  #=raw series fetched  s=skipped\n")
approx = tree.approximate_search(query)
print(f"approximate query (distance {approx.distance:.3f}) touched:")
print(heat_map(recorder.trace(approx.trace_id)), "\n")

exact = tree.exact_search(query)
print(f"exact query (distance {exact.distance:.3f}) touched:")
print(heat_map(recorder.trace(exact.trace_id)))
