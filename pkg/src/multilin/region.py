"""Index-region calculus for m-linear multiplier boundedness.

An index tuple ``(m, n, r, p, s)`` is bounded exactly when every ``s_k > n/r``
and every nonempty ``J`` has ``sum_{k in J} (s_k/n - 1/p_k) > -1/r'``
(``1 < r <= 2``). The failure of either condition is certified by one of two
counterexample families; for ``r > 2`` only the failure direction is known.

Numbers given as ``int`` or ``Fraction`` are compared exactly; floats use a
``1e-12`` band. ``p_k = inf`` is stored as the reciprocal 0.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

BAND = 1e-12
SCAN_BAND = 1e-9


def _num(v):
    if isinstance(v, bool):
        raise TypeError("boolean is not an index value")
    if isinstance(v, Rational):
        return Fraction(v)
    return float(v)


def _exact(*vals) -> bool:
    return all(isinstance(v, Fraction) for v in vals)


def _cmp(a, b) -> int:
    """Sign of ``a - b``: exact on rationals, zero inside the float band."""
    d = a - b
    if _exact(a, b):
        return (d > 0) - (d < 0)
    if abs(d) <= BAND:
        return 0
    return 1 if d > 0 else -1


def _recip(p):
    if isinstance(p, float) and math.isinf(p):
        return Fraction(0)
    return 1 / p


def subsets(m: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of ``{1..m}`` as sorted tuples in lexicographic order."""
    out = [c for k in range(1, m + 1) for c in itertools.combinations(range(1, m + 1), k)]
    return sorted(out)


@dataclass(frozen=True)
class IndexTuple:
    m: int
    n: int
    r: object
    p: tuple
    s: tuple

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if self.n < 1:
            raise ValueError("n must be positive")
        object.__setattr__(self, "r", _num(self.r))
        object.__setattr__(self, "p", tuple(_num(v) for v in self.p))
        object.__setattr__(self, "s", tuple(_num(v) for v in self.s))
        if len(self.p) != self.m or len(self.s) != self.m:
            raise ValueError(f"p and s need {self.m} entries")
        if not 1 < self.r < math.inf:
            raise ValueError("r must lie in (1, inf)")
        if any(not v > 0 for v in self.p):
            raise ValueError("p entries must be positive or inf")
        if any(v < 0 for v in self.s):
            raise ValueError("s entries must be nonnegative")
        if self.inv_p_total == 0:
            raise ValueError("1/p = sum 1/p_k must be positive")

    @property
    def inv_p(self) -> tuple:
        return tuple(_recip(v) for v in self.p)

    @property
    def inv_p_total(self):
        return sum(self.inv_p)

    @property
    def inv_r_dual(self):
        """``1/r' = 1 - 1/r``."""
        return 1 - 1 / self.r

    def j_sum(self, J: Sequence[int]):
        return sum(self.s[k - 1] / self.n - self.inv_p[k - 1] for k in J)


@dataclass
class RegionVerdict:
    bounded: bool | None
    status: str
    failing_condition: dict | None = None
    witness: str | None = None
    boundary: bool = False

    def __post_init__(self) -> None:
        if self.bounded and self.failing_condition is not None:
            raise ValueError("a bounded verdict carries no failing condition")

    @property
    def failing_J(self) -> list[int] | None:
        if self.failing_condition and "J_sum" in self.failing_condition:
            return list(self.failing_condition["J_sum"])
        return None

    def record(self) -> dict:
        fc = self.failing_condition
        return {
            "bounded": self.bounded,
            "status": self.status,
            "failing_J": self.failing_J,
            "failing_min_s": fc.get("min_s") if fc else None,
            "witness": self.witness,
            "boundary": self.boundary,
        }


def check_sufficiency(idx: IndexTuple) -> RegionVerdict:
    """Classify ``idx``; on failure return the first certificate.

    The smoothness floor ``s_k > n/r`` is checked first (smallest ``k``), then
    the ``J``-sums in lexicographic order of ``J``.
    """
    floor = Fraction(idx.n) / idx.r if isinstance(idx.r, Fraction) else idx.n / idx.r
    target = -idx.inv_r_dual
    boundary = any(_cmp(sk, floor) == 0 for sk in idx.s)
    boundary |= any(_cmp(idx.j_sum(J), target) == 0 for J in subsets(idx.m))
    for k, sk in enumerate(idx.s, start=1):
        if _cmp(sk, floor) <= 0:
            return RegionVerdict(False, "unbounded", {"min_s": k, "value": sk}, "prop_1_2", boundary)
    for J in subsets(idx.m):
        v = idx.j_sum(J)
        if _cmp(v, target) <= 0:
            return RegionVerdict(False, "unbounded", {"J_sum": J, "value": v}, "prop_1_3", boundary)
    if _cmp(idx.r, Fraction(2)) > 0:
        return RegionVerdict(None, "open_sufficiency", None, None, boundary)
    return RegionVerdict(True, "bounded", None, None, boundary)


class RegionMismatch(AssertionError):
    def __init__(self, message: str, idx: IndexTuple):
        super().__init__(message)
        self.idx = idx


def _classical_r2(idx: IndexTuple) -> bool:
    """The ``r = 2`` conditions: ``s_k > n/2`` and ``J``-sums ``> -1/2``."""
    half = Fraction(1, 2)
    if any(_cmp(sk, idx.n * half) <= 0 for sk in idx.s):
        return False
    for J in itertools.chain.from_iterable(
            itertools.combinations(range(idx.m), k) for k in range(1, idx.m + 1)):
        total = sum(idx.s[k] / idx.n for k in J) - sum(idx.inv_p[k] for k in J)
        if _cmp(total, -half) <= 0:
            return False
    return True


def check_r2_equivalence(idx: IndexTuple) -> bool:
    if _cmp(idx.r, Fraction(2)) != 0:
        raise ValueError("r must equal 2")
    a = check_sufficiency(idx).bounded
    b = _classical_r2(idx)
    if a != b:
        raise RegionMismatch(f"r=2 disagreement at {idx}: general={a}, classical={b}", idx)
    return True


def random_index_tuple(rng: np.random.Generator, m: int, n: int, r=Fraction(2),
                       grain: int = 8) -> IndexTuple:
    """Rational tuple on a ``1/grain`` lattice so boundary cases occur with positive probability."""
    p = []
    for _ in range(m):
        if rng.random() < 0.15:
            p.append(math.inf)
        else:
            p.append(Fraction(int(rng.integers(1, 8 * grain + 1)), grain))
    s = tuple(Fraction(int(rng.integers(0, 4 * grain * n + 1)), grain) for _ in range(m))
    if all(isinstance(v, float) for v in p):
        p[0] = Fraction(1)
    return IndexTuple(m, n, r, tuple(p), s)


def r2_fuzz(count: int = 10_000, seed: int = 0, ms=(2, 3), ns=(1, 2)) -> int:
    """Check the ``r = 2`` specialization on ``count`` random tuples; returns the count."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.choice(ms))
        n = int(rng.choice(ns))
        check_r2_equivalence(random_index_tuple(rng, m, n))
    return count


# admissible region and its generators -----------------------------------------

def _vectors(s, p):
    s = tuple(_num(v) for v in s)
    p = tuple(_num(v) for v in p)
    if len(s) != len(p):
        raise ValueError("s and p differ in length")
    return s, tuple(_recip(v) for v in p)


def _dual(r):
    r = _num(r)
    if not r > 1:
        raise ValueError("r must exceed 1")
    return 1 - 1 / r


def gamma_membership(s, p, r, n: int, m: int) -> bool:
    """Non-strict ``J``-sum system ``sum_J (s_k/n - 1/p_k) >= -1/r'``."""
    s, ip = _vectors(s, p)
    if len(s) != m:
        raise ValueError(f"expected {m} entries")
    target = -_dual(r)
    return all(_cmp(sum(s[k - 1] / n - ip[k - 1] for k in J), target) >= 0 for J in subsets(m))


def lambda_floors(u: int, p, r, n: int) -> tuple:
    """Lower corner of the generator ``Lambda^u``: ``n/p_u - n/r'`` at ``u``, ``n/p_i`` elsewhere."""
    ip = tuple(_recip(_num(v)) for v in p)
    d = _dual(r)
    return tuple(n * q - (n * d if i == u else 0) for i, q in enumerate(ip, start=1))


def lambda_membership(u: int, s, p, r, n: int) -> bool:
    s = tuple(_num(v) for v in s)
    if not 1 <= u <= len(s):
        raise ValueError("u out of range")
    return all(_cmp(a, b) >= 0 for a, b in zip(s, lambda_floors(u, p, r, n)))


class LPFailure(RuntimeError):
    pass


def _simplex_feasible(A: np.ndarray, b: np.ndarray, tol) -> bool:
    """Phase one of the simplex method with Bland's rule: is ``{x >= 0 : A x = b}`` nonempty?

    Works on float or object (``Fraction``) arrays; ``tol`` is 0 for exact input.
    """
    rows, cols = A.shape
    exact = A.dtype == object
    if exact:
        # int cells would divide to floats
        A = np.vectorize(Fraction, otypes=[object])(A)
        b = np.vectorize(Fraction, otypes=[object])(b)
    else:
        A = A.copy()
        b = b.copy()
    neg = b < 0
    A[neg] = -A[neg]
    b[neg] = -b[neg]
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    T = np.zeros((rows + 1, cols + rows + 1), dtype=A.dtype)
    if exact:
        T[:] = zero
    T[:rows, :cols] = A
    for i in range(rows):
        T[i, cols + i] = one
    T[:rows, -1] = b
    # objective row: minimize the artificial sum, written in reduced form
    T[rows, :cols] = -A.sum(axis=0)
    T[rows, -1] = -b.sum()
    basis = [cols + i for i in range(rows)]
    limit = 50 * (rows + cols)
    for _ in range(limit):
        red = T[rows, :-1]
        enter = next((j for j in range(cols + rows) if red[j] < -tol), None)
        if enter is None:
            break
        col = T[:rows, enter]
        best = None
        for i in range(rows):
            if col[i] > tol:
                q = T[i, -1] / col[i]
                if best is None or q < best[0] - tol or (abs(q - best[0]) <= tol and basis[i] < basis[best[1]]):
                    best = (q, i)
        if best is None:
            raise LPFailure("phase-one objective unbounded")
        i = best[1]
        T[i] = T[i] / T[i, enter]
        for k in range(rows + 1):
            if k != i and T[k, enter] != zero:
                T[k] = T[k] - T[k, enter] * T[i]
        basis[i] = enter
    else:
        raise LPFailure("simplex iteration limit reached")
    resid = -T[rows, -1]
    if exact:
        return resid == 0
    if not np.isfinite(resid):
        raise LPFailure("non-finite phase-one objective")
    return resid <= 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0)))


def _polygon_vertices(p, r, n: int, M) -> list[tuple]:
    """The five corners of the capped two-variable region, counter-clockwise."""
    ip = tuple(_recip(_num(v)) for v in p)
    d = _dual(r)
    a1, b1 = n * ip[0] - n * d, n * ip[0]
    a2, b2 = n * ip[1] - n * d, n * ip[1]
    return [(b1, a2), (M, a2), (M, M), (a1, M), (a1, b2)]


def _in_polygon(pt, verts) -> bool:
    exact = _exact(*pt, *itertools.chain.from_iterable(verts))
    k = len(verts)
    for i in range(k):
        (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % k]
        cross = (x1 - x0) * (pt[1] - y0) - (y1 - y0) * (pt[0] - x0)
        if exact:
            if cross < 0:
                return False
        elif cross < -BAND * max(1.0, abs(float(x1 - x0)) + abs(float(y1 - y0))):
            return False
    return True


def hull_membership(s, p, r, n: int, m: int, M) -> bool:
    """Is ``s`` in the convex hull of the capped generators ``Lambda^u cap [., M]^m``?

    Two variables use the closed-form polygon. Otherwise the hull of boxes is a
    linear feasibility problem in the weights ``theta_u`` and the scaled points
    ``w_u = theta_u v_u``: ``sum_u w_u = s``, ``sum theta = 1``,
    ``theta_u floor_u <= w_u <= theta_u M``.
    """
    s = tuple(_num(v) for v in s)
    M = _num(M)
    if len(s) != m or len(p) != m:
        raise ValueError(f"expected {m} entries")
    ip = tuple(_recip(_num(v)) for v in p)
    if not M > m * n * sum(ip):
        raise ValueError("cap M must exceed m n sum 1/p_k")
    if any(_cmp(v, M) > 0 for v in s):
        raise ValueError("s exceeds the cap M")
    if m == 2:
        return _in_polygon(s, _polygon_vertices(p, r, n, M))
    floors = [lambda_floors(u, p, r, n) for u in range(1, m + 1)]
    # a point inside one generator box is a member with theta = indicator
    for f in floors:
        if all(_cmp(a, b) >= 0 for a, b in zip(s, f)):
            return True
    exact = _exact(*s, M, *itertools.chain.from_iterable(floors))
    # variables: theta (m), y = w - theta floor (m*m), z = slack of the cap (m*m)
    nv = m + 2 * m * m
    A = np.zeros((m + 1 + m * m, nv), dtype=object if exact else float)
    if exact:
        A[:] = Fraction(0)
    bvec = np.zeros(A.shape[0], dtype=A.dtype)
    if exact:
        bvec[:] = Fraction(0)
    y0, z0 = m, m + m * m
    for i in range(m):
        for u in range(m):
            A[i, y0 + u * m + i] = 1
            A[i, u] = floors[u][i]
        bvec[i] = s[i]
    A[m, :m] = 1
    bvec[m] = 1
    for u in range(m):
        for i in range(m):
            row = m + 1 + u * m + i
            A[row, y0 + u * m + i] = 1
            A[row, z0 + u * m + i] = 1
            A[row, u] = -(M - floors[u][i])
    return bool(_simplex_feasible(A, bvec, 0 if exact else 1e-12))


@dataclass
class ScanReport:
    samples: int
    excluded: int
    mismatches: list = field(default_factory=list)
    hull_outside_gamma: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _gamma_slack(s, ip, d, n, m, M) -> float:
    """Smallest distance (in constraint units) from ``s`` to a face of the capped region."""
    vals = [abs(sum(s[k - 1] / n - ip[k - 1] for k in J) + d) for J in subsets(m)]
    vals += [abs(M - v) for v in s]
    return float(min(vals))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MULTILIN_THREADS", "1")))
    except ValueError:
        return 1


def hull_equivalence_scan(p, r, n: int, m: int, M, sample_count: int = 10_000, seed: int = 0,
                          chunk: int = 1000, strict: bool = True) -> ScanReport:
    """Compare capped ``Gamma`` membership with hull membership on uniform samples in ``[0, M]^m``.

    Points within ``1e-9`` of a face are excluded. Samples are drawn in fixed
    chunks with independent streams spawned from ``seed``, so the result does
    not depend on ``MULTILIN_THREADS``.
    """
    if m not in (2, 3):
        raise ValueError("scan supports m in {2, 3}")
    ip = tuple(float(_recip(_num(v))) for v in p)
    d = float(_dual(r))
    Mf = float(M)
    counts = [min(chunk, sample_count - i) for i in range(0, sample_count, chunk)]
    streams = np.random.SeedSequence(seed).spawn(len(counts))

    def work(args):
        cnt, ss = args
        pts = np.random.default_rng(ss).uniform(0.0, Mf, size=(cnt, m))
        excl, bad, outside = 0, [], 0
        for pt in pts:
            pt = tuple(float(v) for v in pt)
            g = gamma_membership(pt, p, r, n, m)
            h = hull_membership(pt, p, r, n, m, M)
            if h and not g:
                outside += 1
            if _gamma_slack(pt, ip, d, n, m, Mf) <= SCAN_BAND:
                excl += 1
                continue
            if g != h:
                bad.append((pt, g, h))
        return excl, bad, outside

    jobs = list(zip(counts, streams))
    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]
    rep = ScanReport(sample_count, sum(e for e, _, _ in parts),
                     [b for _, bs, _ in parts for b in bs], sum(o for _, _, o in parts))
    if strict and rep.mismatches:
        raise RegionMismatch(f"hull and Gamma disagree at {rep.mismatches[0][0]}", None)
    return rep
