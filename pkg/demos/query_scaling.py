"""How many verifier queries do the two strong algorithms need?

The baseline blocks one exact switch set per query, so it has to see every
redundant interleaving; the optimized loop proposes a minimum hitting set
after every trace and stops as soon as the proposal holds.

Run with ``python3 demos/query_scaling.py``.
"""

import time

from atomfix.benchmarks import parameterized_source
from atomfix.inference import fix_strong, fix_strong_baseline, fix_weak
from atomfix.lang import instrument, parse


def program(p1, p2, p3):
    return instrument(parse(parameterized_source(p1, p2, p3)))


print("growing the irrelevant part of the program (p1=0, p2=1)")
print(f"{'p3':>4} {'#CS':>4} {'baseline':>9} {'optimized':>10} {'ms':>8}")
for p3 in (0, 5, 10, 15, 20):
    p = program(0, 1, p3)
    start = time.perf_counter()
    base, opt = fix_strong_baseline(p), fix_strong(p)
    ms = (time.perf_counter() - start) * 1000
    print(f"{p3:>4} {len(p.guard_ids):>4} {base.queries:>9} {opt.queries:>10} {ms:>8.1f}")

print("\ngrowing the fix (p3=0)")
print(f"{'p1':>4} {'p2':>4} {'S':>3} {'W':>3} {'Q(S)':>5} {'Q(W)':>5}")
for p1, p2 in [(0, 1), (1, 1), (2, 1), (0, 2), (0, 4), (0, 8)]:
    p = program(p1, p2, 0)
    s = fix_strong(p)
    w = fix_weak(p, s.result.chosen)
    print(f"{p1:>4} {p2:>4} {len(s.result.chosen):>3} {len(w.result.chosen):>3} {s.queries:>5} {w.queries:>5}")
