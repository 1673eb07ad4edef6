"""Smooth dyadic frequency localizers.

Every family is built from one compactly supported C-infinity cutoff,

    chi(rho) = g(1 - u) / (g(1 - u) + g(u)),  u = (rho - inner) / (outer - inner),
    g(u) = exp(-1/u) for u > 0 and 0 otherwise,

which equals 1 for ``rho <= inner`` and 0 for ``rho >= outer``. Convolutions
with frame members are always carried out as spectral multiplications; the
physical kernels are never sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field, Grid, forward_ft, inverse_ft

KINDS = ("psi", "phi", "Psi_m", "Theta_m", "theta_annular", "theta_tilde", "varphi_ball", "varphi_tilde")


def cutoff(rho, inner: float, outer: float) -> np.ndarray:
    """Evaluate the smooth radial cutoff at ``rho`` (any shape)."""
    if not 0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got ({inner}, {outer})")
    rho = np.asarray(rho, dtype=float)
    out = np.where(rho <= inner, 1.0, 0.0)
    mid = (rho > inner) & (rho < outer)
    if mid.any():
        u = (rho[mid] - inner) / (outer - inner)
        # 1 / (1 + g(u)/g(1-u)), written to avoid 0/0 when both factors underflow
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(1.0 / (1.0 - u) - 1.0 / u))
    return out


def build_cutoff(inner: float, outer: float) -> Callable[[np.ndarray], np.ndarray]:
    if not 0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got ({inner}, {outer})")
    return lambda rho: cutoff(rho, inner, outer)


def chi1(rho) -> np.ndarray:
    return cutoff(rho, 1.0, 2.0)


def psi_hat(rho, j: int = 0) -> np.ndarray:
    """``psi^(xi / 2^j)`` as a function of ``|xi|``; supported in ``2^(j-1) < |xi| < 2^(j+1)``."""
    r = np.asarray(rho, dtype=float) / 2.0**j
    return chi1(r) - chi1(2.0 * r)


def phi_hat(rho, j: int = 0) -> np.ndarray:
    """Low-pass ``phi_j^``: 1 on ``|xi| <= 2^j``, 0 on ``|xi| >= 2^(j+1)``."""
    return chi1(np.asarray(rho, dtype=float) / 2.0**j)


def Psi_hat(rho) -> np.ndarray:
    """Annular localizer on the product space, a function of ``|xi_vec|``."""
    return psi_hat(rho, 0)


def Theta_hat(rho, m: int) -> np.ndarray:
    """1 on ``[1/(4 sqrt m), 4 sqrt m]``, supported in ``[1/(8 sqrt m), 8 sqrt m]``."""
    q = math.sqrt(m)
    return cutoff(rho, 4 * q, 8 * q) - cutoff(rho, 1 / (8 * q), 1 / (4 * q))


def theta_annular_hat(rho, m: int) -> np.ndarray:
    """Bump supported in ``[1/(2000 sqrt m), 1/(1000 sqrt m)]``, equal to 1 at the midpoint."""
    a, b = 1 / (2000 * math.sqrt(m)), 1 / (1000 * math.sqrt(m))
    c = 0.5 * (a + b)
    return cutoff(rho, c, b) - cutoff(rho, a, c)


def theta_tilde_hat(rho, m: int) -> np.ndarray:
    """1 on ``|xi| <= 1/(1000 sqrt m)``, supported in ``|xi| <= 1/(100 sqrt m)``."""
    q = math.sqrt(m)
    return cutoff(rho, 1 / (1000 * q), 1 / (100 * q))


def varphi_tilde_hat(rho, m: int) -> np.ndarray:
    """1 on ``|xi| <= 1/(200 m)``, supported in ``|xi| <= 1/(100 m)``."""
    return cutoff(rho, 1 / (200 * m), 1 / (100 * m))


def varphi_ball(grid: Grid, l: int, m: int) -> tuple[Field, Field]:
    """Nonnegative ``varphi`` with transform supported in ``|xi| <= 1/(200 l m)``.

    Built as ``|eta|^2`` with ``eta^`` a cutoff of radius ``R/2``; the transform
    of ``|eta|^2`` is the autocorrelation of ``eta^`` and so is supported in the
    ball of radius ``R``. Returns ``(varphi, varphi^)``; on the lattice the
    spectral support is exact to the bin.
    """
    R = 1.0 / (200 * l * m)
    eta_hat = Field(grid, cutoff(grid.freq_radius(), R / 4, R / 2), "spectral")
    eta = inverse_ft(eta_hat)
    phi = eta.replace(np.abs(eta.values) ** 2 + 0j)
    hat = forward_ft(phi)
    # zero the round-off outside the exact autocorrelation support
    hat = hat.replace(np.where(grid.freq_radius() <= R, hat.values, 0.0))
    return inverse_ft(hat), hat


_RADII = {
    "psi": lambda m: (0.5, 2.0),
    "phi": lambda m: (0.0, 2.0),
    "Psi_m": lambda m: (0.5, 2.0),
    "Theta_m": lambda m: (1 / (8 * math.sqrt(m)), 8 * math.sqrt(m)),
    "theta_annular": lambda m: (1 / (2000 * math.sqrt(m)), 1 / (1000 * math.sqrt(m))),
    "theta_tilde": lambda m: (0.0, 1 / (100 * math.sqrt(m))),
    "varphi_tilde": lambda m: (0.0, 1 / (100 * m)),
}

_PROFILES = {
    "psi": lambda m: psi_hat,
    "phi": lambda m: phi_hat,
    "Psi_m": lambda m: Psi_hat,
    "Theta_m": lambda m: (lambda r: Theta_hat(r, m)),
    "theta_annular": lambda m: (lambda r: theta_annular_hat(r, m)),
    "theta_tilde": lambda m: (lambda r: theta_tilde_hat(r, m)),
    "varphi_tilde": lambda m: (lambda r: varphi_tilde_hat(r, m)),
}


@dataclass(frozen=True)
class FrameFamily:
    """A radial frequency localizer and its dyadic dilates ``profile(|xi| / 2^j)``."""

    kind: str
    m: int = 1

    def __post_init__(self) -> None:
        if self.kind not in _PROFILES:
            if self.kind == "varphi_ball":
                raise ValueError("varphi_ball is grid-based; use varphi_ball(grid, l, m)")
            raise ValueError(f"unknown frame kind {self.kind!r}")

    @property
    def support_radii(self) -> tuple[float, float]:
        return _RADII[self.kind](self.m)

    def profile(self, rho) -> np.ndarray:
        return _PROFILES[self.kind](self.m)(rho)

    def hat(self, rho, j: int = 0) -> np.ndarray:
        return self.profile(np.asarray(rho, dtype=float) / 2.0**j)


PSI = FrameFamily("psi")
PHI = FrameFamily("phi")


def scale_window(grid: Grid) -> tuple[int, int]:
    """Dyadic scales whose annuli the lattice resolves: ``ceil(log2(8 dxi)), floor(log2(nyq/4))``."""
    j_min = math.ceil(math.log2(8 * grid.freq_step))
    j_max = math.floor(math.log2(grid.nyquist / 4))
    return j_min, j_max


def top_scale(grid: Grid) -> int:
    """Smallest ``j`` with ``phi_j^ = 1`` on every lattice frequency."""
    return math.ceil(math.log2(grid.nyquist * math.sqrt(grid.dims)))


def full_window(grid: Grid) -> tuple[int, int]:
    """``[j_min, top_scale]``: the resolvable window extended until the low-pass is the identity."""
    return scale_window(grid)[0], top_scale(grid)


def frame_convolve(family: FrameFamily, j: int, f: Field) -> Field:
    """``family_j * f`` as a spectral multiplication."""
    lo, hi = full_window(f.grid)
    if not lo <= j <= hi:
        raise ValueError(f"scale {j} outside the resolvable window [{lo}, {hi}]")
    spec = forward_ft(f)
    return inverse_ft(spec.replace(spec.values * family.hat(f.grid.freq_radius(), j)))


def littlewood_paley_pieces(f: Field) -> tuple[Field, list[tuple[int, Field]]]:
    """Split ``f`` into ``phi_{j_min} * f`` and ``psi_j * f`` for ``j_min < j <= top``.

    The pieces sum to ``f`` because the low-pass at the top scale is the identity
    on the lattice.
    """
    lo, hi = full_window(f.grid)
    spec = forward_ft(f)
    rad = f.grid.freq_radius()
    low = inverse_ft(spec.replace(spec.values * phi_hat(rad, lo)))
    pieces = [(j, inverse_ft(spec.replace(spec.values * psi_hat(rad, j)))) for j in range(lo + 1, hi + 1)]
    return low, pieces
