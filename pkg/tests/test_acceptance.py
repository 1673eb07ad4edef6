"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run under pytest (the lines are collected into the terminal summary) or
directly with ``python tests/test_acceptance.py``. Criteria 5, 6 and 10 drive
the default sweeps through the command line.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import parse_sweep, run_cli

import oracles
from multilin.frames import Psi_hat, psi_hat
from multilin.grid import Field, Symbol, forward_ft, lp_norm, make_grid, symbol_from_function
from multilin.kernels import (HKernelParams, h_hat_asymptotics_check, submultiplicative_constant,
                              submultiplicative_ratio)
from multilin.multiplier import apply_multiplier, kappa_decompose, low_high_split
from multilin.norms import peetre_maximal
from multilin.reference import direct_multiplier
from multilin.region import IndexTuple, check_sufficiency, hull_equivalence_scan, r2_fuzz
from multilin.selftest import load_baseline, peetre_constants, pointwise_ratios, spread
from multilin.sharpness import CE2Params, m_identity_check

BASE = load_baseline()
RESULTS = []


def record(no, ok, detail):
    line = f"criterion {no:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _noise(g, rng):
    return Field(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))


# 1 ----------------------------------------------------------------------------------------

def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, cases = 0.0, 0
    # the grid has at least 8 points per axis, so P <= 16 means P in {8, 16}
    for m, sizes in ((2, (8, 16)), (3, (8,))):
        for P in sizes:
            for _ in range(8):
                L = float(rng.uniform(1.0, 4.0))
                g = make_grid(1, P, L)
                sig = rng.normal(size=(P,) * m) + 1j * rng.normal(size=(P,) * m)
                fs = [_noise(g, rng) for _ in range(m)]
                out = apply_multiplier(Symbol(g, m, values=sig), fs).values
                if m == 2:
                    ref = oracles.brute_bilinear(sig, fs[0].values, fs[1].values, L)
                else:
                    ref = oracles.brute_trilinear(sig, [f.values for f in fs], L)
                alt = direct_multiplier(Symbol(g, m, values=sig), fs)
                worst = max(worst, float(np.max(np.abs(out - ref))), float(np.max(np.abs(alt - ref))))
                cases += 1
    wall = time.perf_counter() - t0
    record(1, worst < 1e-10 and wall < 10, f"{cases} random instances, max abs error {worst:.2e}, {wall:.1f}s")


# 2 ----------------------------------------------------------------------------------------

def test_criterion_2_exact_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    errs = {}
    g = make_grid(1, 64, 8.0)
    f1, f2 = _noise(g, rng), _noise(g, rng)
    one = Symbol(g, 2, values=np.ones((64, 64)))
    errs["product"] = float(np.max(np.abs(apply_multiplier(one, [f1, f2]).values - f1.values * f2.values)))
    k = 5
    mod = symbol_from_function(lambda a, b: np.exp(2j * np.pi * k * g.spacing * a), g, 2)
    errs["modulation"] = float(np.max(np.abs(apply_multiplier(mod, [f1, f2]).values
                                             - np.roll(f1.values, -k) * f2.values)))
    sig = symbol_from_function(lambda a, b: Psi_hat(np.hypot(a, b)), make_grid(1, 256, 64.0), 2)
    pieces = kappa_decompose(sig)
    errs["kappa"] = float(np.max(np.abs(sum(p.dense() for p in pieces) - sig.dense())))
    low, high = low_high_split(pieces[0])
    errs["low_high"] = float(np.max(np.abs(low.dense() + high.dense() - pieces[0].dense())))
    gp = make_grid(1, 2**14, 2.0**7)
    rho = np.abs(gp.freq_axis())
    sel = (rho >= 2.0**-5) & (rho <= 2.0**5)
    errs["partition"] = float(np.max(np.abs(sum(psi_hat(rho[sel], j) for j in range(-6, 7)) - 1)))
    par = 0.0
    for dims, P in ((1, 256), (2, 64), (3, 16)):
        h = make_grid(dims, P, 3.0)
        f = _noise(h, rng)
        par = max(par, abs(lp_norm(f, 2) - lp_norm(forward_ft(f), 2)) / lp_norm(f, 2))
    errs["parseval"] = par
    wall = time.perf_counter() - t0
    ok = (max(errs["product"], errs["modulation"]) < 1e-10 and errs["kappa"] < 1e-13 and errs["low_high"] < 1e-13
          and errs["partition"] < 1e-12 and errs["parseval"] < 1e-10 and wall < 30)
    record(2, ok, " ".join(f"{k}={v:.1e}" for k, v in errs.items()) + f", {wall:.1f}s")


# 3 ----------------------------------------------------------------------------------------

def test_criterion_3_kernel_laws():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    count = 100_000
    t = rng.uniform(0.1, 4.0, count)
    gam = rng.uniform(0.1, 4.0, count)
    x = 10.0 ** rng.uniform(-3, 2, count) * rng.choice([-1.0, 1.0], count)
    y = 10.0 ** rng.uniform(-3, 2, count) * rng.choice([-1.0, 1.0], count)
    q = np.array([submultiplicative_ratio(a, b, HKernelParams(tt, gg)) for a, b, tt, gg in zip(x, y, t, gam)])
    c = np.array([submultiplicative_constant(HKernelParams(tt, gg)) for tt, gg in zip(t, gam)])
    unit_fail = int(np.sum(q < 1.0))
    const_fail = int(np.sum(q < c * (1 - 1e-12)))
    i = int(np.argmin(q))
    p = HKernelParams(0.5, 1.0)
    a = h_hat_asymptotics_check(p, make_grid(1, 2**15, 256.0), bounds=BASE["h_hat_ratio_window"])
    b = h_hat_asymptotics_check(p, make_grid(1, 2**16, 256.0), bounds=BASE["h_hat_ratio_window"])
    drift = max(abs(b.ratio_min / a.ratio_min - 1), abs(b.ratio_max / a.ratio_max - 1))
    C = BASE["h_hat_tail_constant"][1]
    tail_ok = max(a.tail_constant, b.tail_constant) <= C
    wall = time.perf_counter() - t0
    ok = unit_fail == 0 and drift < 0.02 and tail_ok and wall < 60
    record(3, ok, f"H(x-y) >= H(x)H(y): {unit_fail}/{count} pairs violate (min ratio {q[i]:.4f} at "
                  f"x={x[i]:.3g}, y={y[i]:.3g}); with constant 2^(-t/2)(1+ln2)^(-gamma/2): {const_fail} violate; "
                  f"window [{a.ratio_min:.4f}, {a.ratio_max:.4f}] drift {drift:.2%}; tail constant {a.tail_constant:.4f} "
                  f"(bound {C}); {wall:.1f}s")


# 4 ----------------------------------------------------------------------------------------

def test_criterion_4_transform_identity():
    prm = CE2Params()
    errs = {(m, l): m_identity_check(l, m, prm.kernel_order, prm.tau, seed=0).max_rel_error
            for m, l in ((2, 1), (2, 2), (3, 2))}
    record(4, max(errs.values()) < 1e-6, " ".join(f"(m,l)={k}: {v:.1e}" for k, v in errs.items()))


# 5 ----------------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_5_ce1_trend(default_ce1):
    code, wall, text = default_ce1
    rows, summary = parse_sweep(text)
    Ns = sorted({float(r["N_or_L"]) for r in rows})
    masses = dict(kv.split(":") for kv in summary["I"].split(";"))
    I = [float(masses[str(int(N))]) for N in Ns]
    Lf = {float(r["N_or_L"]): float(r["L_functional"]) for r in rows}
    plateau = abs(Lf[256] - Lf[64]) / Lf[64]
    mono_I = all(b > a for a, b in zip(I, I[1:]))
    mono_R = True
    for e in sorted({r["eps"] for r in rows}):
        R = [float(r["ratio"]) for r in rows if r["eps"] == e]
        mono_R &= all(b > a for a, b in zip(R, R[1:]))
    e0 = min(rows, key=lambda r: float(r["eps"]))["eps"]
    R = {float(r["N_or_L"]): float(r["ratio"]) for r in rows if r["eps"] == e0}
    growth = R[256] / R[16]
    frozen = BASE["ce1_ratio_growth"][0]
    ok = Ns == [16, 32, 64, 128, 256] and plateau < 0.10 and mono_I and mono_R and growth >= frozen and wall < 300
    record(5, ok, f"L varies {plateau:.2%} (N=64..256); I increasing={mono_I}; R increasing={mono_R}; "
                  f"R(256)/R(16)={growth:.4f} (frozen >= {frozen}); {wall:.0f}s")


# 6 ----------------------------------------------------------------------------------------

def test_criterion_6_ce2_trend(default_ce2):
    code, wall, text = default_ce2
    rows, _ = parse_sweep(text)
    Lf = [float(r["L_functional"]) for r in rows]
    hs = max(spread([float(r["hardy_norms"].split(";")[k]) for r in rows]) for k in range(2))
    ratio = [float(r["ratio"]) for r in rows]
    mono = all(b > a for a, b in zip(ratio, ratio[1:]))
    growth = ratio[-1] / ratio[0]
    frozen = BASE["ce2_ratio_growth"][0]
    ok = spread(Lf) < 0.05 and hs < 0.05 and mono and growth >= frozen
    boxes = ", ".join(r["N_or_L"] for r in rows)
    record(6, ok, f"L = {boxes}: L spread {spread(Lf):.2%}, Hardy spread {hs:.2%}, ratio increasing={mono}, "
                  f"growth {growth:.5f} (frozen >= {frozen})")


# 7 ----------------------------------------------------------------------------------------

def test_criterion_7_region_calculus():
    t0 = time.perf_counter()
    F = Fraction
    verdicts = [
        check_sufficiency(IndexTuple(2, 1, 2, (2, 2), (F(51, 100), F(51, 100)))).bounded is True,
        check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (F(3, 5), F(3, 5)))).failing_J == [1, 2],
        check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (F(1, 2), 5))).failing_condition.get("min_s") == 1,
    ]
    fuzz = r2_fuzz(10_000, seed=0)
    s2 = hull_equivalence_scan((1, 1), 2, 1, 2, 10, 10_000, 0, strict=False)
    s3 = hull_equivalence_scan((1, 2, math.inf), F(3, 2), 1, 3, 12, 10_000, 0, strict=False)
    wall = time.perf_counter() - t0
    ok = all(verdicts) and fuzz == 10_000 and not s2.mismatches and not s3.mismatches and wall < 60
    record(7, ok, f"worked verdicts {sum(verdicts)}/3; r=2 fuzz {fuzz}/10000 agree; hull scan mismatches "
                  f"m=2: {len(s2.mismatches)}, m=3: {len(s3.mismatches)}; {wall:.1f}s")


# 8 ----------------------------------------------------------------------------------------

def test_criterion_8_maximal_functions():
    gc = make_grid(1, 4096, 4096.0)
    c = 1.7
    const = Field(gc, np.full(gc.shape, c + 0j))
    err = max(float(np.max(np.abs(peetre_maximal(const, 2.0, j, 1.0).values - 2 * c))) for j in (-2, 0, 3))
    d1, c1 = peetre_constants(1024, 64.0)
    d2, c2 = peetre_constants(2048, 64.0)
    ref_d = abs(max(d2.values()) / max(d1.values()) - 1)
    ref_c = abs(max(c2.values()) / max(c1.values()) - 1)
    spreads = [spread(d1.values()), spread(c1.values()), spread(d2.values()), spread(c2.values())]
    ok = err < 1e-9 and max(spreads) < 0.10 and max(ref_d, ref_c) < 0.10
    record(8, ok, f"closed form error {err:.1e}; across-window variation domination {spreads[0]:.2%}, "
                  f"composition {spreads[1]:.2%}; refinement drift {ref_d:.2%}, {ref_c:.2%}")


# 9 ----------------------------------------------------------------------------------------

def test_criterion_9_pointwise_bound():
    a = pointwise_ratios(256)
    b = pointwise_ratios(512)
    lo, hi = BASE["pointwise_ratio"]
    drift = max(abs(b[j] / a[j] - 1) for j in a)
    ok = all(lo <= v <= hi for v in a.values()) and drift < 0.05
    record(9, ok, f"max ratio {max(a.values()):.4f} (baseline <= {hi}); P-doubling drift {drift:.2%}")


# 10 ---------------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_10_determinism(tmp_path, default_ce1, default_ce2):
    same = {}
    a = run_cli(["selftest"], tmp_path / "st1.csv", threads="1")
    b = run_cli(["selftest"], tmp_path / "st4.csv", threads="4")
    same["selftest"] = a[2] == b[2] and a[0] == 0 and "#summary" in a[2]
    c = run_cli(["ce2-sweep", "--config", "ce2_default.cfg"], tmp_path / "ce2.csv", threads="4")
    same["ce2-sweep"] = c[2] == default_ce2[2] and c[2] != ""
    d = run_cli(["ce1-sweep", "--config", "ce1_default.cfg"], tmp_path / "ce1.csv", threads="4")
    same["ce1-sweep"] = d[2] == default_ce1[2] and d[2] != ""
    record(10, all(same.values()), "byte-identical at MULTILIN_THREADS=1 vs 4: "
                                   + ", ".join(f"{k}={v}" for k, v in same.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
