"""m-linear Fourier multiplier operators and dyadic decompositions of symbols."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .frames import Theta_hat, phi_hat, psi_hat, scale_window, top_scale
from .grid import PHYSICAL, SPECTRAL, Field, Grid, Symbol, forward_ft, inverse_ft
from .norms import peetre_maximal, product_sobolev_norm


WRAP_FLOOR = 1e-12  # relative size below which a wrapped bin counts as round-off


@dataclass
class MultilinearApplication:
    sigma: Symbol
    inputs: tuple
    output: Field
    wrapped_bins: int = 0


def _spectra(sigma: Symbol, fs: Sequence[Field]) -> list[np.ndarray]:
    if len(fs) != sigma.m:
        raise ValueError(f"expected {sigma.m} inputs, got {len(fs)}")
    out = []
    for f in fs:
        if f.grid != sigma.grid:
            raise ValueError("input grids differ from the symbol's factor grid")
        out.append(f.values if f.space == SPECTRAL else forward_ft(f).values)
    return out


def _fold(H: np.ndarray, P: int, shift: int) -> np.ndarray:
    """Map index ``e`` of ``H`` to lattice index ``(e - shift) mod P`` and sum collisions."""
    out = H
    for ax in range(H.ndim):
        e = out.shape[ax]
        pads = [(0, 0)] * out.ndim
        pads[ax] = (0, (-e) % P)
        padded = np.pad(out, pads)
        shape = list(padded.shape)
        shape[ax:ax + 1] = [padded.shape[ax] // P, P]
        chunks = padded.reshape(shape)
        acc = np.zeros(chunks.shape[:ax] + chunks.shape[ax + 1:], dtype=complex)
        for c in range(chunks.shape[ax]):
            acc += np.take(chunks, c, axis=ax)
        out = np.roll(acc, -shift, axis=ax)
    return out


def apply_multiplier(sigma: Symbol, fs: Sequence[Field], return_info: bool = False):
    """``T_sigma(f_1, ..., f_m)`` on the factor grid.

    The spectral product ``sigma(xi) prod f_k^(xi_k)`` is contracted along the
    anti-diagonals ``xi_1 + ... + xi_m = eta``: the first ``m - 1`` frequency
    variables are looped over and the last one is vectorized, then one inverse
    transform gives the output. Sums that leave the lattice box wrap around
    (exactly, since ``P`` is even); with ``return_info`` the number of nonzero
    wrapped bins (above ``WRAP_FLOOR`` times the peak) is reported. Separable symbols reduce to a pointwise product
    of ``m`` linear multipliers.
    """
    hats = _spectra(sigma, fs)
    g = sigma.grid
    if sigma.separable:
        out = np.ones(g.shape, dtype=complex)
        for fac, h in zip(sigma.factors, hats):
            out = out * inverse_ft(Field(g, fac * h, SPECTRAL)).values
        res = Field(g, out, PHYSICAL)
        return MultilinearApplication(sigma, tuple(fs), res, 0) if return_info else res
    m, n, P = sigma.m, sigma.n, g.points
    ext = m * (P - 1) + 1
    H = np.zeros((ext,) * n, dtype=complex)
    vals = sigma.values
    last = hats[-1]
    for idx in np.ndindex(*([P] * (n * (m - 1)))):
        coeff = 1.0 + 0j
        for k in range(m - 1):
            coeff *= hats[k][idx[k * n:(k + 1) * n]]
        if coeff == 0:
            continue
        sl = tuple(slice(o, o + P) for o in (sum(idx[k * n + a] for k in range(m - 1)) for a in range(n)))
        H[sl] += coeff * vals[idx] * last
    # index e of H holds eta = (e - m P/2) / L, i.e. lattice index e - (m-1) P/2
    shift = (m - 1) * (P // 2)
    mask = np.ones(H.shape, dtype=bool)
    mask[tuple(slice(shift, shift + P) for _ in range(n))] = False
    peak = np.max(np.abs(H)) if H.size else 0.0
    wrapped = int(np.count_nonzero(np.abs(H[mask]) > WRAP_FLOOR * peak))
    res = inverse_ft(Field(g, _fold(H, P, shift) * g.freq_cell ** (m - 1), SPECTRAL))
    return MultilinearApplication(sigma, tuple(fs), res, wrapped) if return_info else res


# localization and decompositions ---------------------------------------------

def _dense_radius(sigma: Symbol) -> np.ndarray:
    return np.sqrt(sum(c * c for c in sigma.freq_coords()))


def localize_symbol(sigma: Symbol, j: int) -> Symbol:
    """``sigma_j = sigma * Theta^(xi_vec / 2^j)``."""
    loc = Theta_hat(_dense_radius(sigma) / 2.0**j, sigma.m)
    return Symbol(sigma.grid, sigma.m, values=sigma.dense() * loc, meta=dict(sigma.meta, j=j))


def _block_radii(sigma: Symbol) -> list[np.ndarray]:
    """``|xi_k|`` per frequency variable, each broadcastable against the dense array."""
    g, m, n = sigma.grid, sigma.m, sigma.n
    axis = g.freq_axis()
    out = []
    for k in range(m):
        sq = 0.0
        for a in range(n):
            shape = [1] * (m * n)
            shape[k * n + a] = g.points
            sq = sq + (axis * axis).reshape(shape)
        out.append(np.sqrt(sq))
    return out


def kappa_scales(grid: Grid) -> tuple[int, int]:
    """Bottom and top bucket scales used by :func:`kappa_decompose`."""
    return scale_window(grid)[0], top_scale(grid)


def _cum(rho: np.ndarray, J: int, lo: int) -> np.ndarray:
    """Sum of the buckets ``<= J``: the low-pass ``phi_J^`` (zero below the bottom bucket)."""
    if J < lo:
        return np.zeros_like(rho)
    return phi_hat(rho, J)


def _bucket(rho: np.ndarray, J: int, lo: int) -> np.ndarray:
    return phi_hat(rho, lo) if J == lo else psi_hat(rho, J)


def kappa_decompose(sigma: Symbol) -> list[Symbol]:
    """Split ``sigma`` by which frequency variable carries the largest dyadic scale.

    Variable ``k`` is bucketed by ``phi_lo^`` (everything below the bottom
    scale) and ``psi_J^`` for ``lo < J <= top``; the buckets sum to 1 on the
    lattice. Piece ``kappa`` collects the products where bucket ``J_kappa`` is
    maximal, strictly larger than ``J_i`` for ``i < kappa`` and at least ``J_i``
    for ``i > kappa``, so the pieces partition the sum.
    """
    lo, hi = kappa_scales(sigma.grid)
    rad = _block_radii(sigma)
    vals = sigma.dense()
    low = np.ones(vals.shape, dtype=bool)
    for rk in rad:
        low = low & (rk < 2.0 ** (lo + 1))
    total = np.sqrt(np.sum(np.abs(vals) ** 2))
    if np.sqrt(np.sum(np.abs(vals[np.broadcast_to(low, vals.shape)]) ** 2)) > 1e-12 * total:
        raise ValueError("symbol has mass on frequencies below the resolvable scales")
    pieces = []
    for kap in range(sigma.m):
        w = np.zeros(vals.shape)
        for J in range(lo, hi + 1):
            term = _bucket(rad[kap], J, lo)
            if not term.any():
                continue
            for i in range(sigma.m):
                if i < kap:
                    term = term * _cum(rad[i], J - 1, lo)
                elif i > kap:
                    term = term * _cum(rad[i], J, lo)
            w = w + term
        pieces.append(Symbol(sigma.grid, sigma.m, values=vals * w,
                             meta={"parent": sigma, "kappa": kap + 1}))
    return pieces


def high_threshold(J: int, m: int) -> int:
    """Largest scale of the secondary variables in the high-frequency part at scale ``J``."""
    return J - 4 - int(math.floor(math.log2(m)))


def high_term(piece: Symbol, J: int) -> Symbol:
    """Scale-``J`` summand of the high part of the first piece."""
    parent = piece.meta["parent"]
    lo, _ = kappa_scales(parent.grid)
    rad = _block_radii(parent)
    w = _bucket(rad[0], J, lo)
    for i in range(1, parent.m):
        w = w * _cum(rad[i], high_threshold(J, parent.m), lo)
    return Symbol(parent.grid, parent.m, values=parent.dense() * w, meta={"J": J})


def low_high_split(piece: Symbol) -> tuple[Symbol, Symbol]:
    """``sigma^(1) = sigma_low + sigma_high``.

    The high part keeps the products whose secondary scales all lie at or
    below ``J - 4 - floor(log2 m)``; the low part is the remainder, formed
    directly (not by subtraction).
    """
    if piece.meta.get("kappa") != 1:
        raise ValueError("low_high_split expects the first piece of kappa_decompose")
    parent = piece.meta["parent"]
    lo, hi = kappa_scales(parent.grid)
    rad = _block_radii(parent)
    w_hi = 0.0
    w_lo = 0.0
    for J in range(lo, hi + 1):
        b = _bucket(rad[0], J, lo)
        if not b.any():
            continue
        full = b
        high = b
        for i in range(1, parent.m):
            full = full * _cum(rad[i], J, lo)
            high = high * _cum(rad[i], high_threshold(J, parent.m), lo)
        w_hi = w_hi + high
        w_lo = w_lo + (full - high)
    vals = parent.dense()
    return (Symbol(parent.grid, parent.m, values=vals * w_lo, meta={"part": "low"}),
            Symbol(parent.grid, parent.m, values=vals * w_hi, meta={"part": "high"}))


# pointwise estimate ------------------------------------------------------------

@dataclass
class PointwiseReport:
    ratio: float
    symbol_norm: float
    j: int
    argmax_x: float


def pointwise_bound_check(sigma: Symbol, fs: Sequence[Field], s: Sequence[float], t: float, j: int,
                          norm_symbol: Symbol, bound: float | None = None) -> PointwiseReport:
    """``max_x |T_sigma f(x)| / (||sigma(2^j .)||_{L^t_s} prod_k M^t_{s_k,2^j} f_k(x))``.

    ``norm_symbol`` is ``sigma(2^j .)`` sampled on a grid fine and wide enough
    for its Sobolev norm (the factor grid of ``sigma`` usually is not).
    """
    if not 1 < t <= 2:
        raise ValueError("need 1 < t <= 2")
    if any(sk <= sigma.n / t for sk in s):
        raise ValueError("need s_k > n/t")
    out = apply_multiplier(sigma, fs)
    lhs = np.abs(out.values)
    if not lhs.any():
        return PointwiseReport(0.0, float("nan"), j, float("nan"))
    snorm = product_sobolev_norm(norm_symbol, t, s)
    den = np.full(sigma.grid.shape, snorm)
    for sk, f in zip(s, fs):
        phys = f if f.space == PHYSICAL else inverse_ft(f)
        den = den * peetre_maximal(phys, sk, j, t).values.real
    if not np.all(den > 0):
        raise ValueError("denominator underflow: an input vanishes identically")
    ratio = lhs / den
    k = int(np.argmax(ratio))
    x = sigma.grid.coords()[0].reshape(-1)[k]
    rep = PointwiseReport(float(ratio.reshape(-1)[k]), snorm, j, float(x))
    if bound is not None and rep.ratio > bound:
        raise ValueError(f"pointwise ratio {rep.ratio:.4g} exceeds bound {bound}")
    return rep
