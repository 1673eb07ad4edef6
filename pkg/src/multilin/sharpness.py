"""Necessity constructions: symbols with bounded Hormander functional and unbounded operators.

Two families are built on one-dimensional periodic grids.

* Smoothness at the critical level ``s_1 = n/r``: the symbol is the transform of
  a mollified kernel ``H_(n, delta) Phi^(x/N)`` shifted to the unit frequency,
  tested against dilated modulated bumps. The Hormander functional stays
  bounded in ``N`` while the operator ratio follows ``int H Phi^(./N)``.
* Critical integrability ``sum_{k<=l} (s_k/n - 1/p_k) = -1/r'``: the symbol is
  built from ``K = H * varphi`` and the inputs from ``H_(n/p_j, tau_j) * varphi``;
  the output ratio diverges with the box length.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .frames import cutoff, theta_annular_hat, theta_tilde_hat, varphi_ball, varphi_tilde_hat
from .grid import SPECTRAL, Field, Grid, Symbol, forward_ft, inverse_ft, lp_norm, make_grid, sample
from .kernels import bracket, h_kernel_radial
from .multiplier import apply_multiplier
from .norms import _radial_range, _support_box, hardy_norm, hormander_functional


def _recip_sum(p: Sequence[float]) -> float:
    return sum(0.0 if math.isinf(v) else 1.0 / v for v in p)


def _power_of_two(x: float) -> bool:
    k = int(round(x))
    return abs(x - k) < 1e-9 * max(1.0, x) and k > 0 and (k & (k - 1)) == 0


@dataclass
class ExperimentRecord:
    run_id: str
    construction: str
    N_or_L: float
    eps: float
    r: float
    delta_or_tau: float
    s_vec: tuple
    p_vec: tuple
    L_functional: float
    hardy_norms: tuple
    output_lp: float
    ratio: float
    wall_ms: float | None = None
    extra: dict = field(default_factory=dict)

    COLUMNS = ("run_id", "construction", "N_or_L", "eps", "r", "delta_or_tau", "s_vec", "p_vec",
               "L_functional", "hardy_norms", "output_lp", "ratio", "wall_ms")

    def to_row(self) -> list[str]:
        def num(v):
            return repr(float(v))

        return [self.run_id, self.construction, num(self.N_or_L), num(self.eps), num(self.r),
                num(self.delta_or_tau), ";".join(num(v) for v in self.s_vec),
                ";".join(num(v) for v in self.p_vec), num(self.L_functional),
                ";".join(num(v) for v in self.hardy_norms), num(self.output_lp), num(self.ratio),
                "NA" if self.wall_ms is None else f"{self.wall_ms:.0f}"]


# critical smoothness ---------------------------------------------------------------

@dataclass(frozen=True)
class CE1Params:
    """Configuration of the critical-smoothness construction (``n = 1``).

    The grid has ``points`` samples on a box of length ``length``; the unit
    frequency must be a lattice frequency, so ``length`` is an integer.
    """

    n: int = 1
    m: int = 2
    r: float = 1.5
    delta: float = 2.0
    s: tuple = (2.0 / 3.0, 2.0)
    p: tuple = (2.0, 2.0)
    N: int = 64
    eps: float = 1.0 / 128
    points: int = 2**24
    length: float = 2.0**22

    def __post_init__(self) -> None:
        if self.n != 1:
            raise ValueError("only n = 1 is implemented")
        if self.m < 2:
            raise ValueError("need m >= 2")
        if not self.r > 1:
            raise ValueError("need r > 1")
        if not 2.0 / self.r < self.delta <= 2.0:
            raise ValueError(f"need 2/r < delta <= 2, got delta={self.delta}")
        if len(self.s) != self.m or len(self.p) != self.m:
            raise ValueError("s and p need m entries")
        if min(self.s) < self.s[0] or self.s[0] > self.n / self.r + 1e-12:
            raise ValueError("need s_1 = min(s) <= n/r")
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not 0 < self.eps < 0.01:
            raise ValueError("need 0 < eps < 1/100")
        if self.length != round(self.length):
            raise ValueError("box length must be an integer so the unit frequency is on the lattice")
        if self.points / (2 * self.length) <= 1.02:
            raise ValueError("nyquist must exceed the symbol support radius 1.01")

    @property
    def p_total(self) -> float:
        return 1.0 / _recip_sum(self.p)

    def grid(self) -> Grid:
        return make_grid(1, self.points, self.length)


def mollified_kernel(grid: Grid, delta: float, N: int, n: int = 1) -> Field:
    """``H_(n, delta)(x) Phi^(x/N)`` with ``Phi^`` the ``(1, 2)`` ball cutoff."""
    return sample(lambda x: h_kernel_radial(np.abs(x), n, delta) * cutoff(np.abs(x) / N, 1.0, 2.0), grid)


def _unit_shift(grid: Grid) -> int:
    return int(round(grid.length))


def _ce1_factors(grid: Grid, kernel_hat: np.ndarray, m: int) -> tuple[np.ndarray, ...]:
    xi = grid.freq_axis()
    shift = _unit_shift(grid)
    first = np.roll(kernel_hat, shift) * theta_tilde_hat(np.abs(xi - 1.0), m)
    rest = theta_tilde_hat(np.abs(xi), m)
    return (first,) + (rest,) * (m - 1)


def ce1_inputs(params: CE1Params, grid: Grid | None = None) -> list[Field]:
    """Spectral samples of ``eps^{n/p_j} theta(eps x)``, the first modulated to the unit frequency."""
    g = grid or params.grid()
    xi = g.freq_axis()
    e, m = params.eps, params.m
    out = []
    for k, pk in enumerate(params.p):
        centre = 1.0 if k == 0 else 0.0
        amp = e ** (params.n / pk) / e
        out.append(Field(g, amp * theta_annular_hat(np.abs(xi - centre) / e, m), SPECTRAL))
    return out


def theta_dilate(params: CE1Params, grid: Grid | None = None) -> Field:
    """``theta(eps x)`` on the grid."""
    g = grid or params.grid()
    e = params.eps
    hat = theta_annular_hat(np.abs(g.freq_axis()) / e, params.m) / e
    return inverse_ft(Field(g, hat, SPECTRAL))


@dataclass
class CE1Construction:
    params: CE1Params
    sigma: Symbol
    inputs: list
    kernel: Field
    mass: float


def _check_ce1_support(sigma: Symbol) -> None:
    box = [iv for f in sigma.factors for iv in _support_box(f, sigma.grid)]
    a, b = _radial_range(box)
    if a < 0.99 or b > 1.01:
        raise ValueError(f"symbol support radii [{a:.5f}, {b:.5f}] leave [0.99, 1.01]; refine the grid")


def ce1_symbol(params: CE1Params, grid: Grid | None = None) -> tuple[Symbol, Field, float]:
    g = grid or params.grid()
    kern = mollified_kernel(g, params.delta, params.N, params.n)
    mass = float(np.sum(kern.values.real)) * g.cell
    khat = forward_ft(kern).values
    sigma = Symbol(g, params.m, factors=_ce1_factors(g, khat, params.m),
                   meta={"construction": "ce1", "N": params.N})
    _check_ce1_support(sigma)
    return sigma, kern, mass


def build_ce1(params: CE1Params) -> CE1Construction:
    """Symbol ``sigma^(N)`` and test inputs; raises if the support check fails."""
    g = params.grid()
    sigma, kern, mass = ce1_symbol(params, g)
    return CE1Construction(params, sigma, ce1_inputs(params, g), kern, mass)


def ce1_factorization_check(con: CE1Construction, count: int = 100, seed: int = 0) -> float:
    """Compare ``|T_sigma f|`` with ``eps^{n/p} |H^(N) * theta(eps .)| |theta(eps .)|^{m-1}``.

    The convolution is a direct circular Riemann sum over the kernel support,
    evaluated at ``count`` random lattice points where ``theta(eps x)`` is not
    negligible. Returns the largest deviation relative to ``max |T_sigma f|``.
    """
    prm = con.params
    g = con.sigma.grid
    out = np.abs(apply_multiplier(con.sigma, con.inputs).values)
    th = theta_dilate(prm, g).values
    rng = np.random.default_rng(seed)
    cand = np.nonzero(np.abs(th) >= 1e-3 * np.abs(th).max())[0]
    idx = np.sort(rng.choice(cand, size=min(count, cand.size), replace=False))
    P, dx = g.points, g.spacing
    half = int(math.ceil(2 * prm.N / dx)) + 1
    offs = np.arange(-half, half + 1)
    kv = con.kernel.values[P // 2 + offs]
    conv = np.array([np.sum(kv * th[(i - offs) % P]) * dx for i in idx])
    closed = prm.eps ** (prm.n / prm.p_total) * np.abs(conv) * np.abs(th[idx]) ** (prm.m - 1)
    return float(np.max(np.abs(out[idx] - closed)) / out.max())


def ce1_sweep(params: CE1Params, N_list: Sequence[int], eps_list: Sequence[float],
              timing: bool = False, run_prefix: str = "ce1") -> tuple[list[ExperimentRecord], dict]:
    """Records for every ``(N, eps)`` plus the kernel masses ``I(N)`` keyed by ``N``.

    Inputs and their Hardy norms depend only on ``eps`` and the symbol only on
    ``N``, so each is computed once.
    """
    N_list, eps_list = list(N_list), list(eps_list)
    if N_list != sorted(N_list) or eps_list != sorted(eps_list):
        raise ValueError("N and eps lists must be sorted ascending")
    g = params.grid()
    p = params.p_total
    hardy = {}
    for e in eps_list:
        prm = _replace(params, eps=e)
        hardy[e] = tuple(hardy_norm(f, pk).value for f, pk in zip(ce1_inputs(prm, g), params.p))
    records, masses = [], {}
    for N in N_list:
        t0 = time.perf_counter()
        prm = _replace(params, N=N)
        sigma, _, mass = ce1_symbol(prm, g)
        masses[N] = mass
        lrep = hormander_functional(sigma, params.r, params.s)
        t_sym = time.perf_counter() - t0
        for e in eps_list:
            t1 = time.perf_counter()
            fs = ce1_inputs(_replace(params, N=N, eps=e), g)
            out = lp_norm(apply_multiplier(sigma, fs), p)
            del fs
            ratio = out / float(np.prod(hardy[e]))
            wall = (t_sym + time.perf_counter() - t1) * 1e3 if timing else None
            records.append(ExperimentRecord(f"{run_prefix}-N{N}-e{e:.6g}", "ce1", N, e, params.r, params.delta,
                                            params.s, params.p, lrep.value, hardy[e], out, ratio, wall,
                                            {"mass": mass, "argmax_j": lrep.argmax_j}))
        del sigma
    return records, masses


def _replace(params, **kw):
    d = {k: getattr(params, k) for k in params.__dataclass_fields__}
    d.update(kw)
    return type(params)(**d)


# critical integrability --------------------------------------------------------------

@dataclass(frozen=True)
class CE2Params:
    """Configuration of the critical-integrability construction (``n = 1``).

    The box length is ``length``; ``spacing`` fixes the sample step so that
    ``length / spacing`` is a power of two.
    """

    n: int = 1
    m: int = 2
    l: int = 1
    r: float = 1.5
    s: tuple = (1.0, 1.0)
    p: tuple = (0.75, 4.0)
    tau: float = 1.5
    tau_tail: tuple = (1.1,)
    spacing: float = 0.390625
    length: float = 12800.0

    def __post_init__(self) -> None:
        n, m, l, r = self.n, self.m, self.l, self.r
        if n != 1:
            raise ValueError("only n = 1 is implemented")
        if not 1 <= l <= m:
            raise ValueError("need 1 <= l <= m")
        if len(self.s) != m or len(self.p) != m or len(self.tau_tail) != m - l:
            raise ValueError("s and p need m entries, tau_tail needs m - l")
        if not r > 1:
            raise ValueError("need r > 1")
        if any(sk <= n / r for sk in self.s):
            raise ValueError("need s_k > n/r for every k")
        rp = r / (r - 1)
        crit = sum(sk / n - 1.0 / pk for sk, pk in zip(self.s[:l], self.p[:l]))
        if crit > -1.0 / rp + 1e-12:
            raise ValueError(f"need sum_(k<=l) (s_k/n - 1/p_k) <= -1/r', got {crit}")
        top = 2.0 / self.p_total - sum(self.tau_tail)
        if not 2.0 / r < self.tau < 2.0 * l / r + 2.0 / rp < top:
            raise ValueError("tau chain 2/r < tau < 2l/r + 2/r' < 2/p - sum(tau_j) fails")
        if any(tj <= 2.0 / pj for tj, pj in zip(self.tau_tail, self.p[l:])):
            raise ValueError("need tau_j > 2/p_j for the tail inputs")
        if not _power_of_two(self.length / self.spacing):
            raise ValueError("length / spacing must be a power of two")

    @property
    def p_total(self) -> float:
        return 1.0 / _recip_sum(self.p)

    @property
    def r_conj(self) -> float:
        return self.r / (self.r - 1)

    @property
    def kernel_order(self) -> float:
        return sum(self.s[:self.l]) + self.n / self.r_conj

    def grid(self) -> Grid:
        return make_grid(1, int(round(self.length / self.spacing)), self.length)


def normalized_varphi(grid: Grid, l: int, m: int) -> tuple[Field, Field]:
    """Nonnegative ``varphi`` with ``int varphi = 1`` and transform in ``|xi| <= 1/(200 l m)``."""
    phi, hat = varphi_ball(grid, l, m)
    c = hat.values[grid.points // 2].real
    return phi * (1.0 / c), hat * (1.0 / c)


def snap_frequency(grid: Grid, mu: float) -> tuple[int, float]:
    """Nearest lattice bin offset (from zero) to ``mu`` and the snapping error."""
    k = int(round(mu * grid.length))
    return k, k / grid.length - mu


@dataclass
class CE2Construction:
    params: CE2Params
    sigma: Symbol
    inputs: list
    kernel: Field
    tails: list
    varphi: Field
    mu: float
    mu_offset: float
    lower_constant: float


def build_ce2(params: CE2Params) -> CE2Construction:
    """Separable symbol ``K^(xi_1 - mu) prod varphi~^(xi_j - mu)`` and the modulated inputs.

    Supported for ``l = 1``; ``mu = m^{-1/2}`` is snapped to the nearest lattice
    bin and the offset is recorded.
    """
    if params.l != 1:
        raise NotImplementedError("build_ce2 is separable only for l = 1; use m_identity_check for l > 1")
    g = params.grid()
    m = params.m
    phi, phih = normalized_varphi(g, params.l, m)
    kb, off = snap_frequency(g, 1.0 / math.sqrt(m))
    mu = kb / g.length
    xi = g.freq_axis()
    H = sample(lambda x: h_kernel_radial(np.abs(x), params.kernel_order, params.tau), g)
    khat = forward_ft(H).values * phih.values
    K = inverse_ft(Field(g, khat, SPECTRAL))
    vt = varphi_tilde_hat(np.abs(xi - mu), m)
    factors = (np.roll(khat, kb),) + (vt,) * (m - 1)
    sigma = Symbol(g, m, factors=factors, meta={"construction": "ce2", "mu": mu})
    for f in sigma.factors:
        box = _support_box(f, g)
        if box is not None and max(abs(box[0][0] - mu), abs(box[0][1] - mu)) > 1.0 / (100 * m) + 1e-12:
            raise ValueError("symbol support leaves |xi_j - mu| <= 1/(100 m)")
    f1 = Field(g, varphi_tilde_hat(np.abs(xi - mu) / 2.0, m), SPECTRAL)
    inputs = [f1] * params.l
    tails = []
    lower = float("inf")
    for pj, tj in zip(params.p[params.l:], params.tau_tail):
        Hj = sample(lambda x: h_kernel_radial(np.abs(x), params.n / pj, tj), g)
        conv = forward_ft(Hj).values * phih.values
        tails.append(inverse_ft(Field(g, conv, SPECTRAL)))
        lower = min(lower, float(np.min(tails[-1].values.real / Hj.values.real)))
        inputs.append(Field(g, np.roll(conv, kb), SPECTRAL))
    if not tails:
        lower = float(np.min(K.values.real / H.values.real))
    return CE2Construction(params, sigma, inputs, K, tails, phi, mu, off, lower)


def ce2_diagonal_check(con: CE2Construction) -> float:
    """``max_x | |T_sigma f| - l |K(l x)| |varphi(0)|^{l-1} prod |H_j * varphi| |``, relative to ``max |T_sigma f|``."""
    out = np.abs(apply_multiplier(con.sigma, con.inputs).values)
    closed = np.abs(con.kernel.values).copy()
    for t in con.tails:
        closed = closed * np.abs(t.values)
    return float(np.max(np.abs(out - closed)) / out.max())


def ce2_sweep(params: CE2Params, L_list: Sequence[float], timing: bool = False,
              run_prefix: str = "ce2") -> list[ExperimentRecord]:
    L_list = list(L_list)
    if L_list != sorted(L_list):
        raise ValueError("box lengths must be sorted ascending")
    out = []
    for L in L_list:
        t0 = time.perf_counter()
        prm = _replace(params, length=float(L))
        con = build_ce2(prm)
        lrep = hormander_functional(con.sigma, prm.r, prm.s)
        hardy = tuple(hardy_norm(f, pk).value for f, pk in zip(con.inputs, prm.p))
        lp = lp_norm(apply_multiplier(con.sigma, con.inputs), prm.p_total)
        ratio = lp / float(np.prod(hardy))
        wall = (time.perf_counter() - t0) * 1e3 if timing else None
        out.append(ExperimentRecord(f"{run_prefix}-L{L:g}", "ce2", L, 0.0, prm.r, prm.tau, prm.s, prm.p,
                                    lrep.value, hardy, lp, ratio, wall,
                                    {"mu_offset": con.mu_offset, "argmax_j": lrep.argmax_j,
                                     "lower_constant": con.lower_constant}))
    return out


# transform identity of the l-fold symbol ---------------------------------------------

@dataclass
class IdentityReport:
    max_rel_error: float
    points: int
    l: int
    m: int


def m_identity_check(l: int, m: int, kernel_order: float, tau: float, count: int = 100, seed: int = 0,
                     length: float = 2.0**16, spacing: float = 1.0, points: int = 1024) -> IdentityReport:
    """Transform of ``M^(l)`` against ``l K(x_1+...+x_l) prod varphi(x_1-x_j) e^{-2 pi i <sum x, mu>}``.

    ``M^(l)`` is sampled on an ``l``-dimensional lattice of step ``1/length``
    centred at ``mu = m^{-1/2}``; its arguments ``(1/l) sum (xi_k - .)`` fall on
    the frequency lattice of a one-dimensional grid of length ``l * length``,
    where ``K = H * varphi`` is built. The lattice transform is compared at
    ``count`` random points where the closed form exceeds ``1e-6`` of its
    maximum; the worst relative error is returned.
    """
    if l not in (1, 2):
        raise ValueError("l must be 1 or 2 (the base grid needs l * length / spacing points, a power of two)")
    G = make_grid(1, int(round(l * length / spacing)), l * length)
    phi, phih = normalized_varphi(G, l, m)
    H = sample(lambda x: h_kernel_radial(np.abs(x), kernel_order, tau), G)
    khat = forward_ft(H).values * phih.values
    K = inverse_ft(Field(G, khat, SPECTRAL)).values
    P = G.points
    mu = 1.0 / math.sqrt(m)
    k = np.arange(points) - points // 2
    ks = np.meshgrid(*([k] * l), indexing="ij")
    # arguments in units of the base frequency step 1/(l length)
    total = sum(ks)
    M = khat[(total + P // 2) % P]
    for j in range(1, l):
        M = M * phih.values[(total - l * ks[j] + P // 2) % P]
    Mg = make_grid(l, points, points / length)
    Mh = forward_ft(Field(Mg, M)).values
    xs = Mg.freq_coords()
    sx = sum(xs)
    Mh = Mh * np.exp(-2j * np.pi * sx * mu)
    dx = G.spacing
    closed = l * K[(np.round(sx / dx).astype(np.int64) + P // 2) % P]
    for j in range(1, l):
        closed = closed * phi.values[(np.round((xs[0] - xs[j]) / dx).astype(np.int64) + P // 2) % P]
    closed = closed * np.exp(-2j * np.pi * sx * mu)
    cand = np.flatnonzero(np.abs(closed) >= 1e-6 * np.abs(closed).max())
    rng = np.random.default_rng(seed)
    pick = rng.choice(cand, size=min(count, cand.size), replace=False)
    a, b = Mh.reshape(-1)[pick], closed.reshape(-1)[pick]
    return IdentityReport(float(np.max(np.abs(a - b) / np.abs(b))), int(pick.size), l, m)


# auxiliary multiplier quotient -----------------------------------------------------------

def nm_quotient(y: np.ndarray, s: Sequence[float], M: float) -> np.ndarray:
    """``N_(M)(y_1, ..., y_l)`` for ``n = 1``; ``y`` has shape ``(..., l)``."""
    y = np.asarray(y, dtype=float)
    l = y.shape[-1]
    mean = y.sum(axis=-1) / l
    num = bracket(mean) ** s[0]
    for j in range(1, l):
        num = num * bracket(mean - y[..., j]) ** s[j]
    den = bracket(y[..., 0]) ** sum(s[:l])
    for j in range(1, l):
        den = den * bracket(y[..., j]) ** M
    return num / den


@dataclass
class NMReport:
    bounds: dict
    worst_point: dict
    ok: bool


def nm_multiplier_check(M: float, l: int, s: Sequence[float], samples: int = 10_000, seed: int = 0,
                        bound: float | None = None, scale: tuple = (-2.0, 4.0),
                        require_hypothesis: bool = True) -> NMReport:
    """Weighted finite-difference bounds ``|y_1|^{a_1} ... |y_l|^{a_l} |D^a N_(M)(y)|`` for ``a in {0, 1}^l``.

    Points have log-uniform magnitudes ``10^scale`` and random signs. Central
    differences use the step ``1e-4 max(1, |y_k|)`` in each differentiated
    variable. With ``bound`` given, ``ok`` reports whether every maximum stays
    below it.
    """
    s = tuple(float(v) for v in s)
    if len(s) < l:
        raise ValueError("need at least l smoothness orders")
    n = 1
    if require_hypothesis and not M > sum(s[:l]) + n + 2:
        raise ValueError("need M > s_1 + ... + s_l + n + 2")
    rng = np.random.default_rng(seed)
    mag = 10.0 ** rng.uniform(scale[0], scale[1], size=(samples, l))
    y = mag * rng.choice([-1.0, 1.0], size=(samples, l))
    bounds, worst = {}, {}
    for alpha in np.ndindex(*([2] * l)):
        val = _mixed_difference(y, alpha, s[:l], M)
        w = np.ones(samples)
        for k, a in enumerate(alpha):
            if a:
                w = w * np.abs(y[:, k])
        q = w * np.abs(val)
        i = int(np.argmax(q))
        bounds[alpha] = float(q[i])
        worst[alpha] = tuple(float(v) for v in y[i])
    ok = bound is None or all(v <= bound for v in bounds.values())
    return NMReport(bounds, worst, ok)


def _mixed_difference(y: np.ndarray, alpha: tuple, s: tuple, M: float) -> np.ndarray:
    steps = 1e-4 * np.maximum(1.0, np.abs(y))
    total = np.zeros(y.shape[0])
    active = [k for k, a in enumerate(alpha) if a]
    for signs in np.ndindex(*([2] * len(active))):
        yy = y.copy()
        coef = 1.0
        for k, sg in zip(active, signs):
            d = 1.0 if sg == 0 else -1.0
            yy[:, k] += d * steps[:, k]
            coef *= d
        total += coef * nm_quotient(yy, s, M)
    for k in active:
        total = total / (2.0 * steps[:, k])
    return total
