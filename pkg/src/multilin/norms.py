"""Sobolev-type norms of symbols, Hardy and BMO quasi-norms, maximal operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .frames import FrameFamily, full_window, phi_hat, psi_hat, scale_window
from .grid import PHYSICAL, SPECTRAL, Field, Grid, Symbol, forward_ft, inverse_ft, lp_norm
from .kernels import TWO_PI


@dataclass(frozen=True)
class SmoothnessVector:
    s: tuple
    r: float

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.s):
            raise ValueError("smoothness orders must be nonnegative")
        if not self.r > 0:
            raise ValueError("r must be positive")


@dataclass
class NormReport:
    value: float
    j_window: tuple
    argmax_j: int
    resolution: dict
    per_scale: dict = field(default_factory=dict)

    def to_row(self, norm_id: str) -> list:
        return [norm_id, repr(self.value), self.j_window[0], self.j_window[1], self.argmax_j,
                self.resolution["P"], repr(self.resolution["L"])]


# Sobolev norms ---------------------------------------------------------------

def _check_r(r: float) -> None:
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")


def _bracket_weight(grid: Grid, blocks: Sequence[tuple[int, int]], orders: Sequence[float]) -> np.ndarray:
    """``prod_k <eta_k>^{s_k}`` on the spectral lattice, ``eta_k`` the coordinates in ``blocks[k]``."""
    axis = grid.freq_axis()
    w = np.ones(grid.shape)
    for (a, b), s in zip(blocks, orders):
        if s == 0:
            continue
        sq = np.zeros(grid.shape)
        for ax in range(a, b):
            shape = [1] * grid.dims
            shape[ax] = grid.points
            sq = sq + (axis * axis).reshape(shape)
        w = w * (1.0 + TWO_PI**2 * sq) ** (0.5 * s)
    return w


def _weighted_norm(F: Field, blocks, orders, r: float) -> float:
    if all(s == 0 for s in orders):
        return lp_norm(F, r)
    spec = forward_ft(F)
    g = inverse_ft(spec.replace(spec.values * _bracket_weight(F.grid, blocks, orders)))
    return lp_norm(g, r)


def _as_product_field(F) -> Field:
    if isinstance(F, Symbol):
        return Field(F.product_grid, F.dense(), PHYSICAL)
    if F.space != PHYSICAL:
        raise ValueError("product_sobolev_norm expects a physical-space field")
    return F


def _factor_field(sym: Symbol, k: int) -> Field:
    return Field(sym.grid.dual(), sym.factors[k], PHYSICAL)


def product_sobolev_norm(F, r: float, s: Sequence[float]) -> float:
    """``|| (I - Delta_1)^{s_1/2} ... (I - Delta_m)^{s_m/2} F ||_{L^r}``.

    ``F`` is a :class:`Symbol` (then the variable blocks are its frequency
    variables) or a physical :class:`Field` on ``(R^n)^m`` whose ``m * n`` axes
    are split into ``m = len(s)`` equal blocks. Separable symbols factor exactly
    into a product of ``n``-dimensional norms.
    """
    _check_r(r)
    s = tuple(float(v) for v in s)
    if isinstance(F, Symbol) and F.separable:
        if len(s) != F.m:
            raise ValueError("need one smoothness order per frequency variable")
        n = F.n
        out = 1.0
        for k in range(F.m):
            out *= _weighted_norm(_factor_field(F, k), [(0, n)], [s[k]], r)
        return out
    G = _as_product_field(F)
    m = len(s)
    if G.grid.dims % m:
        raise ValueError("number of axes is not a multiple of len(s)")
    n = G.grid.dims // m
    return _weighted_norm(G, [(k * n, (k + 1) * n) for k in range(m)], s, r)


def standard_sobolev_norm(F, r: float, s: float) -> float:
    """``|| (I - Delta)^{s/2} F ||_{L^r}`` with the Laplacian in all variables jointly."""
    _check_r(r)
    if isinstance(F, Symbol):
        G = Field(F.product_grid, F.dense(), PHYSICAL)
    else:
        G = _as_product_field(F)
    return _weighted_norm(G, [(0, G.grid.dims)], [float(s)], r)


# Hormander functional --------------------------------------------------------

NEGLIGIBLE = 1e-12

def hormander_window(grid: Grid) -> tuple[int, int]:
    """Dilation scales examined by :func:`hormander_functional`.

    The lower end is the resolvable scale ``ceil(log2(8 dxi))``; the upper end
    ``floor(log2(nyquist)) + 1`` is the first scale whose dilate reads the
    symbol only outside the lattice box, where it is taken to vanish.
    """
    return scale_window(grid)[0], math.floor(math.log2(grid.nyquist)) + 1


def _lattice_index(P: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Source indices for ``sigma(2^j xi)`` on one axis and the in-box mask."""
    k = np.arange(P) - P // 2
    if j >= 0:
        src = k * (1 << j)
    else:
        src = np.round(k / float(1 << -j)).astype(np.int64)
    src = src + P // 2
    ok = (src >= 0) & (src < P)
    return np.where(ok, src, 0), ok


def dilate_array(values: np.ndarray, j: int) -> np.ndarray:
    """``v(2^j xi)`` on the lattice: index stride for ``j >= 0``, nearest index for ``j < 0``.

    Samples that fall outside the lattice box are zero.
    """
    out = values
    for ax in range(values.ndim):
        src, ok = _lattice_index(values.shape[ax], j)
        out = np.take(out, src, axis=ax)
        shape = [1] * values.ndim
        shape[ax] = -1
        out = out * ok.reshape(shape)
    return out


def dilate_symbol(sym: Symbol, j: int) -> Symbol:
    """``sigma(2^j .)`` sampled on the same lattice."""
    meta = dict(sym.meta)
    fn = meta.get("fn")
    if sym.separable:
        fns = meta.get("factor_fns")
        if fns is not None:
            axis = sym.grid.freq_coords()
            facs = tuple(np.asarray(f(*[c * 2.0**j for c in axis]), dtype=complex) * np.ones(sym.grid.shape)
                         for f in fns)
        else:
            facs = tuple(dilate_array(f, j) for f in sym.factors)
        return Symbol(sym.grid, sym.m, factors=facs, meta=meta)
    if fn is not None:
        coords = sym.freq_coords()
        vals = np.asarray(fn(*[c * 2.0**j for c in coords]), dtype=complex) * np.ones(coords[0].shape)
        return Symbol(sym.grid, sym.m, values=vals, meta=meta)
    return Symbol(sym.grid, sym.m, values=dilate_array(sym.values, j), meta=meta)


def _support_box(values: np.ndarray, grid: Grid) -> list[tuple[float, float]] | None:
    """Per-axis frequency range of the nonzero samples, ``None`` if all zero."""
    nz = values != 0
    if not nz.any():
        return None
    axis = grid.freq_axis()
    box = []
    for ax in range(values.ndim):
        other = tuple(a for a in range(values.ndim) if a != ax)
        hit = np.nonzero(nz.any(axis=other) if other else nz)[0]
        box.append((float(axis[hit[0]]), float(axis[hit[-1]])))
    return box


def _symbol_box(sigma: Symbol) -> list[tuple[float, float]] | None:
    if sigma.separable:
        boxes = [_support_box(f, sigma.grid) for f in sigma.factors]
        if any(b is None for b in boxes):
            return None
        return [iv for b in boxes for iv in b]
    return _support_box(sigma.values, sigma.grid)


def _radial_range(box: list[tuple[float, float]]) -> tuple[float, float]:
    near = 0.0
    far = 0.0
    for lo, hi in box:
        if lo > 0:
            near += lo * lo
        elif hi < 0:
            near += hi * hi
        far += max(lo * lo, hi * hi)
    return math.sqrt(near), math.sqrt(far)


def _profile_range(frame: FrameFamily, a: float, b: float) -> tuple[float, float]:
    rho = np.concatenate([[a, b, 1.0] if a <= 1.0 <= b else [a, b], np.linspace(a, b, 2049)])
    v = frame.profile(rho)
    return float(v.min()), float(v.max())


def _touches_edge(sigma: Symbol) -> bool:
    arrs = sigma.factors if sigma.separable else (sigma.values,)
    for a in arrs:
        for ax in range(a.ndim):
            if np.any(np.take(a, 0, axis=ax) != 0):
                return True
    return False


def hormander_functional(sigma: Symbol, r: float, s: Sequence[float],
                         frame: FrameFamily | None = None, window: tuple | None = None) -> NormReport:
    """``sup_j || sigma(2^j .) Psi^ ||_{L^r_s}`` over the lattice scale window.

    For separable symbols the localizer is a function of ``|xi_vec|`` and so does
    not factor; when it is constant on the support box of the dilate (within
    ``1e-14`` relative) the norm factors exactly, otherwise the dense product is
    formed (``m * n <= 4``). Scales where the localizer stays below
    ``NEGLIGIBLE`` on the support are estimated by that maximum times the
    unlocalized norm and listed in ``report.negligible``.
    """
    _check_r(r)
    frame = frame or FrameFamily("Psi_m", sigma.m)
    if _touches_edge(sigma):
        raise ValueError("symbol is nonzero on the outermost lattice bins; enlarge P or shrink L")
    lo, hi = window if window is not None else hormander_window(sigma.grid)
    if lo > hi:
        raise ValueError("empty scale window")
    s = tuple(float(v) for v in s)
    per = {}
    negligible = []
    inner, outer = frame.support_radii
    dense_rad = None
    base = _symbol_box(sigma)
    step = sigma.grid.freq_step
    for j in range(lo, hi + 1):
        if base is None:
            per[j] = 0.0
            continue
        # support of sigma(2^j .) is base / 2^j up to one bin of rounding
        a, b = _radial_range([(x0 / 2.0**j - step, x1 / 2.0**j + step) for x0, x1 in base])
        if b <= inner or a >= outer:
            per[j] = 0.0
            continue
        d = dilate_symbol(sigma, j)
        if d.separable:
            boxes = [_support_box(f, sigma.grid) for f in d.factors]
            if any(b is None for b in boxes):
                per[j] = 0.0
                continue
            box = [iv for b in boxes for iv in b]
        else:
            box = _support_box(d.values, sigma.grid)
            if box is None:
                per[j] = 0.0
                continue
        a, b = _radial_range(box)
        if b <= inner or a >= outer:
            per[j] = 0.0
            continue
        vmin, vmax = _profile_range(frame, max(a, 0.0), b)
        if d.separable and vmax - vmin <= 1e-14 * vmax:
            per[j] = vmax * product_sobolev_norm(d, r, s)
            continue
        if d.separable and vmax <= NEGLIGIBLE:
            # the localizer only grazes the support; scale by its largest value
            per[j] = vmax * product_sobolev_norm(d, r, s)
            negligible.append(j)
            continue
        if dense_rad is None:
            if sigma.m * sigma.n > 4:
                raise ValueError("localizer not constant on the support and m*n > 4")
            if sigma.grid.size ** sigma.m > 2**26:
                raise ValueError("localizer not constant on the support and the dense product is too large")
            coords = sigma.freq_coords()
            dense_rad = np.sqrt(sum(c * c for c in coords))
        loc = Symbol(sigma.grid, sigma.m, values=d.dense() * frame.profile(dense_rad))
        per[j] = product_sobolev_norm(loc, r, s)
    js = sorted(per)
    vals = [per[j] for j in js]
    arg = js[int(np.argmax(vals))]
    rep = NormReport(float(max(vals)), (lo, hi), arg, sigma.grid.summary(), per)
    rep.negligible = negligible
    return rep


# Maximal operators -------------------------------------------------------------

def _box_sums(a: np.ndarray, w: int) -> np.ndarray:
    """Periodic sums over the centered cube of half-width ``w`` cells."""
    out = a
    for ax in range(a.ndim):
        P = a.shape[ax]
        pads = [(0, 0)] * a.ndim
        pads[ax] = (w + 1, w)
        c = np.cumsum(np.pad(out, pads, mode="wrap"), axis=ax)
        # c[i + 2w + 1] - c[i] is the sum over original indices i - w .. i + w
        out = np.take(c, range(2 * w + 1, 2 * w + 1 + P), axis=ax) - np.take(c, range(P), axis=ax)
    return out


def hl_maximal(f: Field, t: float = 1.0) -> Field:
    """``(M |f|^t)^{1/t}`` with ``M`` the centered maximal average over lattice cubes.

    Cubes have half-widths ``2^k`` cells (``k >= 0``), plus the single cell and
    the whole box.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    a = np.abs(f.values) ** t
    d = f.grid.dims
    best = a.copy()
    w = 1
    while 2 * w + 1 <= f.grid.points:
        best = np.maximum(best, _box_sums(a, w) / float(2 * w + 1) ** d)
        w *= 2
    best = np.maximum(best, a.mean())
    return Field(f.grid, best ** (1.0 / t), PHYSICAL)


def _peetre_weight_1d(grid: Grid, a: float, q: float, images: int = 64) -> np.ndarray:
    """Cell integrals of ``(1 + a|y|)^-q`` summed over all periodic images.

    Images ``|i| <= images`` are integrated exactly with the closed-form
    antiderivative; the remaining mass (also exact) is spread uniformly over
    the cells, so the weights sum to ``2 / (a (q - 1))`` to round-off.
    """
    dx, L, P = grid.spacing, grid.length, grid.points

    def G(y):
        return np.sign(y) * (1.0 - (1.0 + a * np.abs(y)) ** (1.0 - q)) / (a * (q - 1.0))

    y = (np.arange(P) - P // 2) * dx
    w = np.zeros(P)
    # sum in a fixed order, far images first, to keep the reduction deterministic
    for i in range(images, -images - 1, -1):
        w += G(y + 0.5 * dx + i * L) - G(y - 0.5 * dx + i * L)
    R = (images + 0.5) * L
    tail = 2.0 * (1.0 + a * R) ** (1.0 - q) / (a * (q - 1.0))
    return w + tail * dx / L


def _radial_tail(n: int, a: float, q: float, R: float) -> float:
    """``int_{|y| > R} (1 + a|y|)^-q dy`` over ``R^n`` (needs ``q > n``)."""
    area = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    v0 = 1.0 + a * R
    # r^{n-1} = ((v - 1)/a)^{n-1}, expanded binomially
    tot = 0.0
    for k in range(n):
        tot += math.comb(n - 1, k) * (-1.0) ** (n - 1 - k) * v0 ** (k + 1 - q) / (q - k - 1)
    return area * tot / a**n


def _peetre_weight_nd(grid: Grid, a: float, q: float) -> np.ndarray:
    """Cell integrals of ``(1 + a|y|)^-q`` over a ``5^n`` block of periodic images plus the far tail.

    Cells next to the origin, where the weight has a kink, are midpoint
    subsampled; the mass outside the block is that outside the disk of equal
    volume, spread uniformly over the cells.
    """
    L, n, dx = grid.length, grid.dims, grid.spacing
    coords = grid.coords()
    w = np.zeros(grid.shape)
    for shift in np.ndindex(*([5] * n)):
        sq = sum((c + (k - 2) * L) ** 2 for c, k in zip(coords, shift))
        w += (1.0 + a * np.sqrt(sq)) ** (-q)
    w *= grid.cell
    sub = 16 if n <= 2 else 6
    u = (np.arange(sub) + 0.5) / sub - 0.5
    centre = tuple(P // 2 for P in grid.shape)
    for cell in np.ndindex(*([5] * n)):
        off = [k - 2 for k in cell]
        mesh = np.meshgrid(*[(o + u) * dx for o in off], indexing="ij")
        exact = float(np.mean((1.0 + a * np.sqrt(sum(m * m for m in mesh))) ** (-q))) * grid.cell
        coarse = (1.0 + a * dx * math.sqrt(sum(o * o for o in off))) ** (-q) * grid.cell
        idx = tuple(c + o for c, o in zip(centre, off))
        w[idx] += exact - coarse
    R = 5.0 * L / (math.pi ** (n / 2) / math.gamma(n / 2 + 1)) ** (1.0 / n)
    return w + _radial_tail(n, a, q, R) / grid.size


def _circular_convolve(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``sum_y a(x - y) w(y)`` with ``w`` stored centered (index ``P/2`` is ``y = 0``)."""
    ax = tuple(range(a.ndim))
    W = np.fft.rfftn(np.fft.ifftshift(w, axes=ax), axes=ax)
    out = np.fft.irfftn(np.fft.rfftn(a, axes=ax) * W, s=a.shape, axes=ax)
    return np.maximum(out, 0.0)


def peetre_maximal(f: Field, s: float, j: int, t: float) -> Field:
    """``2^{jn/t} || f(x - .) / (1 + 2^j |.|)^s ||_{L^t}`` at every lattice point.

    For ``t = inf`` this is the weighted sliding supremum. Finite ``t`` needs
    ``s t > n`` so the weight is integrable.
    """
    if not s > 0 or not t > 0:
        raise ValueError("need s > 0 and t > 0")
    g = f.grid
    n = g.dims
    a = 2.0**j
    absf = np.abs(f.values)
    if math.isinf(t):
        return Field(g, _weighted_sup(absf, g, a, s), PHYSICAL)
    q = s * t
    if q <= n:
        raise ValueError(f"s*t = {q} must exceed n = {n}; increase s or t")
    w = _peetre_weight_1d(g, a, q) if n == 1 else _peetre_weight_nd(g, a, q)
    conv = _circular_convolve(absf**t, w)
    return Field(g, a ** (n / t) * conv ** (1.0 / t), PHYSICAL)


def _weighted_sup(absf: np.ndarray, g: Grid, a: float, s: float) -> np.ndarray:
    P, dx = g.points, g.spacing
    k = np.arange(P)
    k = np.where(k < P // 2, k, k - P)  # minimal-image offsets
    best = np.zeros_like(absf)
    for shift in np.ndindex(*([P] * g.dims)):
        off = [k[i] for i in shift]
        dist = dx * math.sqrt(sum(o * o for o in off))
        cand = np.roll(absf, off, axis=tuple(range(g.dims))) * (1.0 + a * dist) ** (-s)
        np.maximum(best, cand, out=best)
    return best


# Hardy, square function, BMO -----------------------------------------------------

def _spectrum(f: Field) -> Field:
    return f if f.space == SPECTRAL else forward_ft(f)


def hardy_norm(f: Field, p: float, window: tuple | None = None) -> NormReport:
    """``|| sup_j |phi_j * f| ||_{L^p}`` with ``j`` over the lattice window.

    ``f`` may be given in either representation; a spectral input keeps exact
    zeros, and scales where ``phi_j^`` is identically 0 or 1 on the support of
    ``f^`` are evaluated without a transform. ``argmax_j`` is the scale with the
    largest ``|| phi_j * f ||_p`` (smallest such ``j`` on ties).
    """
    if not p > 0:
        raise ValueError("p must be positive")
    spec = _spectrum(f)
    g = f.grid
    lo, hi = window if window is not None else full_window(g)
    rad = g.freq_radius()
    supp = spec.values != 0
    rs = rad[supp]
    phys = None
    best = np.zeros(g.shape)
    per = {}
    for j in range(lo, hi + 1):
        h = phi_hat(rs, j)
        if h.size == 0 or not h.any():
            per[j] = 0.0
            continue
        if np.all(h == 1.0):
            if phys is None:
                phys = np.abs(inverse_ft(spec).values) if f.space == SPECTRAL else np.abs(f.values)
            a = phys
        else:
            a = np.abs(inverse_ft(spec.replace(spec.values * phi_hat(rad, j))).values)
        np.maximum(best, a, out=best)
        per[j] = lp_norm(Field(g, a, PHYSICAL), p)
    js = sorted(per)
    vals = [per[j] for j in js]
    arg = js[int(np.argmax(vals))]
    return NormReport(lp_norm(Field(g, best, PHYSICAL), p), (lo, hi), arg, g.summary(), per)


def square_scales(grid: Grid) -> tuple[int, int]:
    """Scales whose annuli meet the nonzero lattice frequencies."""
    return math.floor(math.log2(grid.freq_step)), full_window(grid)[1]


def square_function_norm(f: Field, p: float) -> float:
    """``|| (sum_j |psi_j * f|^2)^{1/2} ||_{L^p}`` over every scale touching the lattice."""
    if not p > 0:
        raise ValueError("p must be positive")
    spec = _spectrum(f)
    g = f.grid
    zero = tuple(P // 2 for P in g.shape)
    total = math.sqrt(float(np.sum(np.abs(spec.values) ** 2)) * g.freq_cell)
    mean_part = abs(spec.values[zero]) * math.sqrt(g.freq_cell)
    if mean_part > 1e-10 * total:
        raise ValueError("square function needs a mean-zero input (psi_j annihilates constants)")
    rad = g.freq_radius()
    acc = np.zeros(g.shape)
    lo, hi = square_scales(g)
    for j in range(lo, hi + 1):
        h = psi_hat(rad, j)
        if not h.any():
            continue
        acc += np.abs(inverse_ft(spec.replace(spec.values * h)).values) ** 2
    return lp_norm(Field(g, np.sqrt(acc), PHYSICAL), p)


def bmo_seminorm(f: Field) -> float:
    """Sup over lattice-aligned dyadic cubes of the mean oscillation."""
    v = f.values
    g = f.grid
    best = 0.0
    P, d = g.points, g.dims
    size = 2
    while size <= P:
        nb = P // size
        shape = []
        for _ in range(d):
            shape += [nb, size]
        blocks = v.reshape(shape)
        inner = tuple(range(1, 2 * d, 2))
        mean = blocks.mean(axis=inner, keepdims=True)
        osc = np.abs(blocks - mean).mean(axis=inner)
        best = max(best, float(osc.max()))
        size *= 2
    return best
