"""The two blowup constructions on reduced grids.

In the first, the symbol's Hormander functional stays flat while the operator
norm ratio climbs with the mollification parameter N. In the second, input
Hardy norms and the functional plateau as the box grows while the ratio keeps
increasing. The default configurations (about 3 minutes and 3 GB for the
first) run through ``multilin ce1-sweep`` and ``multilin ce2-sweep``.

    python demos/sharpness_tour.py
"""

from multilin.sharpness import CE1Params, CE2Params, build_ce2, ce1_sweep, ce2_diagonal_check, ce2_sweep

print("critical smoothness, step 1/4 on a box of length 2^18")
recs, masses = ce1_sweep(CE1Params(points=2**20, length=float(2**18)), (16, 32, 64), (1 / 128,))
for rec in recs:
    print(f"  N={rec.N_or_L:5.0f}  kernel mass {masses[int(rec.N_or_L)]:.5f}  functional {rec.L_functional:9.2f}"
          f"  ratio {rec.ratio:.5f}")
print(f"  growth R(64)/R(16) = {recs[-1].ratio / recs[0].ratio:.4f}")

print("\ncritical integrability")
con = build_ce2(CE2Params(length=3200.0))
print(f"  snapped centre frequency {con.mu:.9f}, diagonal check error {ce2_diagonal_check(con):.1e}")
for rec in ce2_sweep(CE2Params(), (3200.0, 6400.0, 12800.0)):
    h = ", ".join(f"{v:.4f}" for v in rec.hardy_norms)
    print(f"  L={rec.N_or_L:7.0f}  Hardy norms ({h})  functional {rec.L_functional:.4f}  ratio {rec.ratio:.6f}")
