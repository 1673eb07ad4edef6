"""Bessel-type kernels with logarithmic decay and their analytic properties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import Grid, Field, forward_ft, sample

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HKernelParams:
    t: float
    gamma: float
    n: int = 1

    def __post_init__(self) -> None:
        if not self.t > 0 or not self.gamma > 0:
            raise ValueError(f"need t > 0 and gamma > 0, got t={self.t}, gamma={self.gamma}")
        if self.n < 1:
            raise ValueError("n must be positive")


def _sq_radius(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n == 1:
        return x * x
    if x.shape[-1] != n:
        raise ValueError(f"expected points with last axis of length {n}")
    return np.sum(x * x, axis=-1)


def bracket(x, n: int = 1) -> np.ndarray:
    """Japanese bracket ``(1 + 4 pi^2 |x|^2)^(1/2)``.

    For ``n > 1`` the last axis of ``x`` holds the coordinates.
    """
    return np.sqrt(1.0 + TWO_PI**2 * _sq_radius(x, n))


def h_kernel_radial(rho, t: float, gamma: float) -> np.ndarray:
    """Kernel value as a function of ``|x|``."""
    u = TWO_PI**2 * np.square(np.asarray(rho, dtype=float))
    return (1.0 + u) ** (-0.5 * t) * (1.0 + np.log1p(u)) ** (-0.5 * gamma)


def h_kernel_eval(x, params: HKernelParams) -> np.ndarray:
    """``(1 + 4 pi^2 |x|^2)^(-t/2) (1 + log(1 + 4 pi^2 |x|^2))^(-gamma/2)``."""
    u = TWO_PI**2 * _sq_radius(x, params.n)
    return (1.0 + u) ** (-0.5 * params.t) * (1.0 + np.log1p(u)) ** (-0.5 * params.gamma)


def h_kernel_field(grid: Grid, params: HKernelParams) -> Field:
    if grid.dims != params.n:
        raise ValueError("grid dimension does not match kernel dimension")
    return sample(lambda *xs: h_kernel_radial(np.sqrt(sum(c * c for c in xs)), params.t, params.gamma), grid)


# two-point inequality --------------------------------------------------------

def submultiplicative_ratio(x, y, params: HKernelParams) -> np.ndarray:
    """``H(x - y) / (H(x) H(y))`` for paired points (last axis holds coordinates when ``n > 1``)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return h_kernel_eval(x - y, params) / (h_kernel_eval(x, params) * h_kernel_eval(y, params))


def submultiplicative_constant(params: HKernelParams) -> float:
    """``c`` with ``H(x - y) >= c H(x) H(y)`` for all ``x, y``: ``2^{-t/2} (1 + log 2)^{-gamma/2}``.

    From ``<x - y>^2 <= 2 <x>^2 <y>^2`` and ``1 + log(2 ab) <= (1 + log 2)(1 + log a)(1 + log b)``.
    """
    return 2.0 ** (-0.5 * params.t) * (1.0 + math.log(2.0)) ** (-0.5 * params.gamma)


def unit_constant_region(x, y, n: int = 1) -> np.ndarray:
    """Pairs where ``H(x - y) >= H(x) H(y)`` holds with constant 1: ``x.y >= -2 pi^2 |x|^2 |y|^2``.

    There ``<x - y> <= <x><y>``, and the logarithmic factor follows from the
    bracket inequality. Opposite points near the origin (``y = -x``,
    ``|x| < 1/(sqrt 2 pi)``) lie outside.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dot = x * y if n == 1 else np.sum(x * y, axis=-1)
    return dot >= -0.5 * TWO_PI**2 * _sq_radius(x, n) * _sq_radius(y, n)


# L^p finiteness ------------------------------------------------------------

def _sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _as_fraction(v: float) -> Fraction:
    return Fraction(v).limit_denominator(10**6)


def analytic_lp_finite(params: HKernelParams, p: float) -> bool:
    """Closed-form criterion: finite iff ``t > n/p`` or (``t = n/p`` and ``gamma > 2/p``).

    Comparisons are done on rationals recovered from the inputs, so boundary
    cases such as ``t = 1, p = 1`` are decided exactly.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if math.isinf(p):
        return True
    t, g, q = _as_fraction(params.t), _as_fraction(params.gamma), _as_fraction(p)
    crit = Fraction(params.n) / q
    if t != crit:
        return t > crit
    return g > 2 / q


@dataclass
class FinitenessWitness:
    verdict: str
    radii: np.ndarray
    masses: np.ndarray
    trend: str
    warnings: list = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return self.verdict == "finite"


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _shell_mass(a: float, b: float, t: float, gamma: float, p: float, n: int) -> float:
    """``int_a^b H(rho)^p rho^(n-1) d rho`` by Gauss-Legendre in ``log rho``."""
    la, lb = math.log(a), math.log(b)
    s = 0.5 * (lb - la) * _GL_NODES + 0.5 * (lb + la)
    rho = np.exp(s)
    vals = h_kernel_radial(rho, t, gamma) ** p * rho**n
    return 0.5 * (lb - la) * float(np.dot(_GL_WEIGHTS, vals))


def h_lp_finiteness_witness(params: HKernelParams, p: float, k_max: int = 20,
                            tol: float = 5e-3) -> FinitenessWitness:
    """Analytic verdict plus truncated-ball masses of ``H^p`` over radii ``2^k``.

    The numeric trend is "cauchy" when the last dyadic shell adds less than
    ``tol`` relative mass and "growing" otherwise. A disagreement with the
    analytic verdict is recorded as a warning, not raised: log-rate divergence
    can look flat at any reachable radius.
    """
    verdict = "finite" if analytic_lp_finite(params, p) else "infinite"
    t, g, n = params.t, params.gamma, params.n
    area = _sphere_area(n)
    # inner ball |x| < 2^-4: the integrand is bounded, plain Gauss-Legendre in rho
    r0 = 2.0**-4
    rho = 0.5 * r0 * (_GL_NODES + 1.0)
    base = 0.5 * r0 * float(np.dot(_GL_WEIGHTS, h_kernel_radial(rho, t, g) ** p * rho ** (n - 1)))
    radii = 2.0 ** np.arange(0, k_max + 1)
    edges = np.concatenate([2.0 ** np.arange(-4, 0), radii])
    shells = [_shell_mass(a, b, t, g, p, n) for a, b in zip(edges[:-1], edges[1:])]
    cum = base + np.cumsum(shells)
    masses = area * cum[3:]
    incr = (masses[-1] - masses[-2]) / masses[-1]
    trend = "cauchy" if incr < tol else "growing"
    warnings = []
    if (verdict == "finite") != (trend == "cauchy"):
        warnings.append({
            "check": "lp_finiteness",
            "verdict": verdict,
            "trend": trend,
            "last_relative_increment": float(incr),
        })
    return FinitenessWitness(verdict, radii, masses, trend, warnings)


# Fourier-side asymptotics --------------------------------------------------

@dataclass
class HatAsymptoticsReport:
    ratio_min: float
    ratio_max: float
    tail_constant: float
    window: tuple
    grid: dict


def small_frequency_law(xi_abs, params: HKernelParams) -> np.ndarray:
    """``|xi|^-(n-t) (1 + 2 log(1/|xi|))^(-gamma/2)`` for ``|xi| < 1``."""
    xi_abs = np.asarray(xi_abs, dtype=float)
    return xi_abs ** (-(params.n - params.t)) * (1.0 + 2.0 * np.log(1.0 / xi_abs)) ** (-0.5 * params.gamma)


def h_hat(params: HKernelParams, grid: Grid) -> Field:
    return forward_ft(h_kernel_field(grid, params))


def h_hat_asymptotics_check(params: HKernelParams, grid: Grid, window=(0.02, 0.4),
                            tail=(2.0, 16.0), bounds=None) -> HatAsymptoticsReport:
    """Compare the discrete transform with the two-sided small-frequency law.

    Returns the extreme ratios over ``window`` and the smallest constant ``C``
    with ``|H^(xi)| <= C exp(-|xi|/2)`` on ``tail``. When ``bounds`` is given as
    ``(c1, c2)`` a ratio outside it raises ``ValueError``.
    """
    if not 0 < params.t < params.n:
        raise ValueError("small-frequency law needs 0 < t < n")
    hat = h_hat(params, grid)
    rad = grid.freq_radius()
    vals = np.abs(hat.values)
    sel = (rad >= window[0]) & (rad <= window[1])
    if not sel.any():
        raise ValueError("no lattice frequency inside the ratio window")
    ratio = vals[sel] / small_frequency_law(rad[sel], params)
    tsel = (rad > tail[0]) & (rad <= tail[1])
    tail_c = float(np.max(vals[tsel] * np.exp(0.5 * rad[tsel]))) if tsel.any() else float("nan")
    rep = HatAsymptoticsReport(float(ratio.min()), float(ratio.max()), tail_c, tuple(window), grid.summary())
    if bounds is not None and not (bounds[0] <= rep.ratio_min and rep.ratio_max <= bounds[1]):
        raise ValueError(f"ratio window [{rep.ratio_min:.4g}, {rep.ratio_max:.4g}] outside {bounds}")
    return rep
