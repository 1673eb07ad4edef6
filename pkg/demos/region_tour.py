"""Which smoothness indices make every multiplier in the class bounded?

Classifies a few index tuples, shows the certificate returned when a tuple
fails, and compares the closed region with the convex hull of its generator
sets on random samples.

    python demos/region_tour.py
"""

from fractions import Fraction as F
import math

from multilin.region import (IndexTuple, check_sufficiency, gamma_membership, hull_equivalence_scan,
                             hull_membership, r2_fuzz)

cases = [
    ("smooth enough, L^2 x L^2", IndexTuple(2, 1, 2, (2, 2), (F("0.51"), F("0.51")))),
    ("joint condition fails, H^1 x H^1", IndexTuple(2, 1, 2, (1, 1), (F("0.6"), F("0.6")))),
    ("on the smoothness floor", IndexTuple(2, 1, 2, (1, 1), (F(1, 2), 5))),
    ("r above 2", IndexTuple(2, 1, 3, (2, 2), (1, 1))),
]
for label, idx in cases:
    v = check_sufficiency(idx)
    print(f"{label:34s} -> {v.status:17s} certificate={v.failing_condition} boundary={v.boundary}")

print(f"\nr=2 agreement with the classical conditions: {r2_fuzz(2000, seed=1)}/2000 tuples")

p, r = (1, 1), 2
for s in [(F(3, 4), F(3, 4)), (F(2, 3), F(2, 3)), (F("0.4"), 9)]:
    print(f"s={tuple(str(v) for v in s)}: in closed region {gamma_membership(s, p, r, 1, 2)}, "
          f"in hull {hull_membership(s, p, r, 1, 2, 10)}")

for p, r, m, M in (((1, 1), 2, 2, 10), ((1, 2, math.inf), F(3, 2), 3, 12)):
    rep = hull_equivalence_scan(p, r, 1, m, M, 2000, 0, strict=False)
    print(f"m={m} p={p} r={r}: {rep.samples} samples, {rep.excluded} in the boundary band, "
          f"{len(rep.mismatches)} mismatches")
