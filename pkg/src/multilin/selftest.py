"""Invariant suite behind ``multilin selftest`` and the shared test configurations.

Every check returns ``(name, value, lower, upper, ok)``. Frozen constants come
from ``data/baseline.txt``; exact checks carry their tolerance as the upper
bound.
"""

from __future__ import annotations

import math
from fractions import Fraction
from importlib import resources

import numpy as np

from .frames import Theta_hat, full_window, littlewood_paley_pieces
from .grid import SPECTRAL, Field, Symbol, inverse_ft, lp_norm, make_grid, sample
from .kernels import (HKernelParams, h_hat_asymptotics_check, submultiplicative_constant, submultiplicative_ratio,
                      unit_constant_region)
from .multiplier import apply_multiplier, kappa_decompose, low_high_split, pointwise_bound_check
from .norms import hl_maximal, peetre_maximal
from .reference import direct_multiplier
from .region import IndexTuple, check_sufficiency, hull_equivalence_scan, r2_fuzz
from .sharpness import (CE1Params, CE2Params, build_ce1, ce1_factorization_check, ce1_sweep, ce2_sweep,
                        m_identity_check, nm_multiplier_check)


def load_baseline() -> dict[str, tuple[float, float]]:
    text = resources.files("multilin").joinpath("data", "baseline.txt").read_text()
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, lo, hi = line.split()
            out[key] = (float(lo), float(hi))
    return out


def _result(name, value, lo, hi):
    value = float(value)
    return (name, value, float(lo), float(hi), bool(lo <= value <= hi))


# shared configurations ---------------------------------------------------------------

def random_field(grid, rng, band: float | None = None) -> Field:
    """Complex field with random spectrum, optionally limited to ``|xi| <= band``."""
    spec = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    if band is not None:
        spec = np.where(grid.freq_radius() <= band, spec, 0.0)
    return Field(grid, spec, SPECTRAL)


def random_symbol(grid, m, rng) -> Symbol:
    shape = grid.shape * m
    return Symbol(grid, m, values=rng.normal(size=shape) + 1j * rng.normal(size=shape))


def bandlimited_signal(P: int, L: float, seed: int = 0, band: float = 2.0) -> Field:
    """Real-coefficient test signal whose spectrum depends only on ``(L, seed)``, not on ``P``."""
    g = make_grid(1, P, L)
    rng = np.random.default_rng(seed)
    K = int(band * L)
    kk = np.arange(-K, K + 1)
    co = (rng.normal(size=kk.size) + 1j * rng.normal(size=kk.size)) * np.exp(-np.pi * (kk / L) ** 2)
    spec = np.zeros(P, dtype=complex)
    spec[kk + P // 2] = co
    return inverse_ft(Field(g, spec, SPECTRAL))


def pointwise_configuration(P: int = 256):
    """Localized symbols ``Theta^(|xi|/2^j)``, two Gaussian inputs and the symbol used for the Sobolev norm."""
    g = make_grid(1, P, 2.0)
    f1 = sample(lambda x: np.exp(-np.pi * (4 * x) ** 2), g)
    f2 = sample(lambda x: np.exp(-np.pi * (4 * (x - 0.1)) ** 2) * np.exp(2j * np.pi * 3 * x), g)
    gn = make_grid(1, 256, 8.0)
    a, b = np.meshgrid(gn.freq_axis(), gn.freq_axis(), indexing="ij")
    norm_symbol = Symbol(gn, 2, values=Theta_hat(np.hypot(a, b), 2))
    x1, x2 = np.meshgrid(g.freq_axis(), g.freq_axis(), indexing="ij")
    rad = np.hypot(x1, x2)
    sigmas = {j: Symbol(g, 2, values=Theta_hat(rad / 2.0**j, 2)) for j in range(-2, 3)}
    return sigmas, (f1, f2), norm_symbol


POINTWISE_S = (1.0, 1.0)
POINTWISE_T = 1.5


def pointwise_ratios(P: int = 256) -> dict[int, float]:
    sigmas, fs, ns = pointwise_configuration(P)
    return {j: pointwise_bound_check(sig, fs, POINTWISE_S, POINTWISE_T, j, ns).ratio for j, sig in sigmas.items()}


def peetre_constants(P: int = 1024, L: float = 64.0, seed: int = 0) -> tuple[dict, dict]:
    """Per-scale ``max M^1_{2,2^j} f / M_1 f`` and ``max M^2_{2,2^j} M^1_{2,2^j} f / M^1_{2,2^j} f``."""
    f = bandlimited_signal(P, L, seed)
    m1 = hl_maximal(f, 1.0).values.real
    lo, hi = full_window(f.grid)
    dom, comp = {}, {}
    for j in range(lo, hi + 1):
        a = peetre_maximal(f, 2.0, j, 1.0).values.real
        dom[j] = float(np.max(a / m1))
        b = peetre_maximal(Field(f.grid, a + 0j), 2.0, j, 2.0).values.real
        comp[j] = float(np.max(b / a))
    return dom, comp


def spread(vals) -> float:
    vals = list(vals)
    return (max(vals) - min(vals)) / max(vals)


SELFTEST_CE1 = dict(points=2**20, length=float(2**18))
SELFTEST_CE1_N = (16, 32, 64)


# the suite ----------------------------------------------------------------------

def run_selftest(seed: int = 0, quick: bool = False) -> list[tuple]:
    base = load_baseline()
    rng = np.random.default_rng(seed)
    out = []

    # multiplier against the direct sum
    err = 0.0
    for m, sizes in ((2, (8, 16)), (3, (8,))):
        for P in sizes:
            g = make_grid(1, P, 4.0)
            sig = random_symbol(g, m, rng)
            fs = [random_field(g, rng) for _ in range(m)]
            got = apply_multiplier(sig, fs).values
            err = max(err, float(np.max(np.abs(got - direct_multiplier(sig, fs)))))
    out.append(_result("oracle_equivalence", err, 0.0, 1e-10))

    # exact identities
    g = make_grid(1, 64, 8.0)
    f1, f2 = random_field(g, rng), random_field(g, rng)
    one = Symbol(g, 2, factors=(np.ones(64), np.ones(64)))
    prod = inverse_ft(f1).values * inverse_ft(f2).values
    out.append(_result("unit_symbol_product", np.max(np.abs(apply_multiplier(one, [f1, f2]).values - prod)),
                       0.0, 1e-10 * np.max(np.abs(prod))))
    h = random_field(make_grid(1, 256, 32.0), rng)
    low, pieces = littlewood_paley_pieces(inverse_ft(h))
    total = low.values + sum(p.values for _, p in pieces)
    ref = inverse_ft(h).values
    out.append(_result("partition_of_unity", np.max(np.abs(total - ref)) / np.max(np.abs(ref)), 0.0, 1e-12))
    phys = inverse_ft(h)
    pars = abs(lp_norm(phys, 2) - lp_norm(h, 2)) / lp_norm(h, 2)
    out.append(_result("parseval", pars, 0.0, 1e-10))
    gk = make_grid(1, 128, 16.0)
    a, b = np.meshgrid(gk.freq_axis(), gk.freq_axis(), indexing="ij")
    rad = np.hypot(a, b)
    sig = Symbol(gk, 2, values=np.where(rad > 1.5, rng.normal(size=rad.shape), 0.0))
    pieces = kappa_decompose(sig)
    out.append(_result("kappa_reconstruction",
                       np.max(np.abs(sum(p.dense() for p in pieces) - sig.dense())), 0.0, 1e-12))
    lo_, hi_ = low_high_split(pieces[0])
    out.append(_result("low_high_reconstruction",
                       np.max(np.abs(lo_.dense() + hi_.dense() - pieces[0].dense())), 0.0, 1e-12))

    # kernel laws
    x = rng.uniform(-4, 4, size=100_000)
    y = rng.uniform(-4, 4, size=100_000)
    kp = HKernelParams(0.7, 1.3)
    q = submultiplicative_ratio(x, y, kp)
    out.append(_result("submultiplicative_constant_margin", q.min() / submultiplicative_constant(kp), 1.0, math.inf))
    inside = unit_constant_region(x, y)
    out.append(_result("submultiplicative_unit_region_min", q[inside].min(), 1.0 - 1e-15, math.inf))
    prm = HKernelParams(0.5, 1.0)
    r1 = h_hat_asymptotics_check(prm, make_grid(1, 2**15, 1024.0))
    r2 = h_hat_asymptotics_check(prm, make_grid(1, 2**16, 2048.0))
    lo_b, hi_b = base["h_hat_ratio_window"]
    out.append(_result("h_hat_ratio_min", r1.ratio_min, lo_b, hi_b))
    out.append(_result("h_hat_ratio_max", r1.ratio_max, lo_b, hi_b))
    drift = max(abs(r2.ratio_min / r1.ratio_min - 1), abs(r2.ratio_max / r1.ratio_max - 1))
    out.append(_result("h_hat_doubling_drift", drift, 0.0, 0.02))
    out.append(_result("h_hat_tail_constant", r1.tail_constant, *base["h_hat_tail_constant"]))

    # transform identity of the l-fold symbol
    c2 = CE2Params()
    for m, l in ((2, 1), (2, 2), (3, 2)):
        rep = m_identity_check(l, m, c2.kernel_order, c2.tau, seed=seed)
        out.append(_result(f"m_identity_m{m}_l{l}", rep.max_rel_error, 0.0, 1e-6))

    # region calculus
    verdicts = [
        check_sufficiency(IndexTuple(2, 1, 2, (2, 2), (Fraction(51, 100), Fraction(51, 100)))).bounded is True,
        check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (Fraction(3, 5), Fraction(3, 5)))).failing_J == [1, 2],
        check_sufficiency(IndexTuple(2, 1, 2, (1, 1), (Fraction(1, 2), 5))).failing_condition.get("min_s") == 1,
    ]
    out.append(_result("region_worked_verdicts", sum(verdicts), 3, 3))
    out.append(_result("region_r2_fuzz", r2_fuzz(10_000, seed), 10_000, 10_000))
    s2 = hull_equivalence_scan((1, 1), 2, 1, 2, 10, 10_000, seed, strict=False)
    s3 = hull_equivalence_scan((1, 2, math.inf), Fraction(3, 2), 1, 3, 12, 10_000, seed, strict=False)
    out.append(_result("hull_scan_m2_mismatches", len(s2.mismatches), 0, 0))
    out.append(_result("hull_scan_m3_mismatches", len(s3.mismatches), 0, 0))

    # maximal functions
    gc = make_grid(1, 4096, 4096.0)
    c = 1.7
    const = Field(gc, np.full(gc.shape, c + 0j))
    err = max(float(np.max(np.abs(peetre_maximal(const, 2.0, j, 1.0).values - 2 * c))) for j in (-2, 0, 3))
    out.append(_result("peetre_constant_closed_form", err, 0.0, 1e-9))
    dom, comp = peetre_constants()
    out.append(_result("peetre_domination_max", max(dom.values()), *base["peetre_domination"]))
    out.append(_result("peetre_domination_spread", spread(dom.values()), 0.0, 0.10))
    out.append(_result("peetre_composition_max", max(comp.values()), *base["peetre_composition"]))
    out.append(_result("peetre_composition_spread", spread(comp.values()), 0.0, 0.10))

    # pointwise estimate
    pw = pointwise_ratios(256)
    out.append(_result("pointwise_ratio_max", max(pw.values()), *base["pointwise_ratio"]))
    if not quick:
        pw2 = pointwise_ratios(512)
        out.append(_result("pointwise_doubling_drift",
                           max(abs(pw2[j] / pw[j] - 1) for j in pw), 0.0, 0.05))

    # auxiliary multiplier quotient
    nm = nm_multiplier_check(7, 2, (1, 1), seed=seed)
    out.append(_result("nm_quotient_max", max(nm.bounds.values()), *base["nm_quotient"]))
    neg = nm_multiplier_check(1, 2, (1, 1), seed=seed, require_hypothesis=False)
    out.append(_result("nm_negative_control", neg.bounds[(0, 0)], base["nm_quotient"][1], math.inf))

    # necessity constructions
    recs = ce2_sweep(CE2Params(), (12800.0, 25600.0, 51200.0))
    out.append(_result("ce2_L_spread", spread(r.L_functional for r in recs), 0.0, 0.05))
    out.append(_result("ce2_hardy_spread",
                       max(spread(r.hardy_norms[k] for r in recs) for k in range(2)), 0.0, 0.05))
    growth = [b.ratio / a.ratio for a, b in zip(recs, recs[1:])]
    out.append(_result("ce2_ratio_min_step", min(growth), 1.0 + 1e-9, math.inf))
    out.append(_result("ce2_ratio_growth", recs[-1].ratio / recs[0].ratio, *base["ce2_ratio_growth"]))
    if not quick:
        prm1 = CE1Params(**SELFTEST_CE1)
        recs, masses = ce1_sweep(prm1, SELFTEST_CE1_N, (1.0 / 128,))
        Is = [masses[N] for N in SELFTEST_CE1_N]
        Rs = [r.ratio for r in recs]
        out.append(_result("ce1_mass_min_step", min(b / a for a, b in zip(Is, Is[1:])), 1.0 + 1e-9, math.inf))
        out.append(_result("ce1_ratio_min_step", min(b / a for a, b in zip(Rs, Rs[1:])), 1.0 + 1e-9, math.inf))
        out.append(_result("ce1_L_spread", spread(r.L_functional for r in recs), 0.0, 0.10))
        con = build_ce1(CE1Params(N=16, **SELFTEST_CE1))
        out.append(_result("ce1_factorization", ce1_factorization_check(con, seed=seed), 0.0, 1e-8))
    return out
