"""Periodic-box discretization with continuum-calibrated Fourier transforms.

The box ``[-L/2, L/2)^d`` is sampled at ``P`` points per axis. Physical samples
are stored with ``x = -L/2 + k * dx``; spectral samples are stored in ascending
signed order ``xi = k / L`` for ``k`` in ``[-P/2, P/2)``. With these orderings

    forward_ft(f)(xi) ~ integral f(x) exp(-2 pi i x.xi) dx
    inverse_ft(F)(x)  ~ integral F(xi) exp(+2 pi i x.xi) dxi

are both exact Riemann sums of the continuum integrals.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

PHYSICAL = "physical"
SPECTRAL = "spectral"
SYMBOL = "symbol"

_MAGIC = b"MLF1"
_HEADER = struct.Struct("<4sBBBBQd8x")  # 32 bytes
_SPACE_CODES = {PHYSICAL: 0, SPECTRAL: 1, SYMBOL: 2}
_SPACE_NAMES = {v: k for k, v in _SPACE_CODES.items()}


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Metadata of a periodic sampling lattice.

    Attributes
    ----------
    dims : int
        Number of axes (1 to 4).
    points : int
        Samples per axis ``P`` (a power of two, at least 8).
    length : float
        Box length ``L``; the box is ``[-L/2, L/2)`` on every axis.
    """

    dims: int
    points: int
    length: float

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def freq_step(self) -> float:
        return 1.0 / self.length

    @property
    def nyquist(self) -> float:
        return self.points / (2.0 * self.length)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dims

    @property
    def size(self) -> int:
        return self.points**self.dims

    @property
    def cell(self) -> float:
        """Physical cell volume ``dx^d``."""
        return self.spacing**self.dims

    @property
    def freq_cell(self) -> float:
        """Spectral cell volume ``dxi^d``."""
        return self.freq_step**self.dims

    def axis(self) -> np.ndarray:
        """Physical coordinates along one axis."""
        return -0.5 * self.length + self.spacing * np.arange(self.points)

    def freq_axis(self) -> np.ndarray:
        """Signed lattice frequencies along one axis, ascending."""
        return (np.arange(self.points) - self.points // 2) / self.length

    def coords(self) -> list[np.ndarray]:
        """Physical coordinate arrays, one per axis, each of full grid shape."""
        return _mesh(self.axis(), self.dims)

    def freq_coords(self) -> list[np.ndarray]:
        return _mesh(self.freq_axis(), self.dims)

    def radius(self) -> np.ndarray:
        return _norm(self.coords())

    def freq_radius(self) -> np.ndarray:
        return _norm(self.freq_coords())

    def dual(self) -> "Grid":
        """Grid whose physical lattice is this grid's frequency lattice.

        Symbols live on frequency lattices; Sobolev norms of a symbol treat it as
        an ordinary function sampled on the dual grid, whose own frequency
        lattice coincides with the original physical lattice.
        """
        return Grid(self.dims, self.points, self.points / self.length)

    def with_dims(self, dims: int) -> "Grid":
        return make_grid(dims, self.points, self.length)

    def summary(self) -> dict:
        return {"dims": self.dims, "P": self.points, "L": self.length}


def _mesh(axis: np.ndarray, dims: int) -> list[np.ndarray]:
    if dims == 1:
        return [axis.copy()]
    return list(np.meshgrid(*([axis] * dims), indexing="ij"))


def _norm(parts: Sequence[np.ndarray]) -> np.ndarray:
    total = np.zeros_like(parts[0], dtype=float)
    for p in parts:
        total = total + p * p
    return np.sqrt(total)


def make_grid(dims: int, points_per_axis: int, box_length: float) -> Grid:
    """Validate and build a :class:`Grid`."""
    if not isinstance(dims, (int, np.integer)) or not 1 <= dims <= 4:
        raise ValueError(f"dims must be an integer in 1..4, got {dims!r}")
    if not isinstance(points_per_axis, (int, np.integer)) or not _is_power_of_two(int(points_per_axis)):
        raise ValueError(f"points_per_axis must be a power of two, got {points_per_axis!r}")
    if points_per_axis < 8:
        raise ValueError(f"points_per_axis must be at least 8, got {points_per_axis}")
    if not np.isfinite(box_length) or box_length <= 0:
        raise ValueError(f"box_length must be positive, got {box_length!r}")
    return Grid(int(dims), int(points_per_axis), float(box_length))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a grid, in one representation."""

    grid: Grid
    values: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self) -> None:
        if self.space not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown space tag {self.space!r}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def replace(self, values: np.ndarray, space: str | None = None) -> "Field":
        return Field(self.grid, values, self.space if space is None else space)

    def __add__(self, other: "Field") -> "Field":
        _same(self, other)
        return self.replace(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same(self, other)
        return self.replace(self.values - other.values)

    def __mul__(self, c) -> "Field":
        if isinstance(c, Field):
            _same(self, c)
            return self.replace(self.values * c.values)
        return self.replace(self.values * c)

    __rmul__ = __mul__


def _same(a: Field, b: Field) -> None:
    if a.grid != b.grid or a.space != b.space:
        raise ValueError("fields live on different grids or representations")


def sample(fn: Callable[..., np.ndarray], grid: Grid) -> Field:
    """Evaluate ``fn(x_1, ..., x_d)`` at every lattice point.

    ``fn`` receives one coordinate array per axis and must be vectorized.
    """
    coords = grid.coords()
    vals = np.broadcast_to(np.asarray(fn(*coords), dtype=complex), grid.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i[0]) for i in np.nonzero(bad))
        where = tuple(float(c[idx]) for c in coords)
        raise ValueError(f"non-finite sample at x={where}")
    return Field(grid, np.array(vals), PHYSICAL)


def _axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(grid.dims))


def forward_ft(f: Field) -> Field:
    """Continuum-calibrated forward transform (physical to spectral)."""
    if f.space != PHYSICAL:
        raise ValueError("forward_ft expects a physical-space field")
    ax = _axes(f.grid)
    out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=ax), axes=ax), axes=ax)
    return Field(f.grid, out * f.grid.cell, SPECTRAL)


def inverse_ft(f: Field) -> Field:
    """Continuum-calibrated inverse transform (spectral to physical)."""
    if f.space != SPECTRAL:
        raise ValueError("inverse_ft expects a spectral-space field")
    ax = _axes(f.grid)
    out = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(f.values, axes=ax), axes=ax), axes=ax)
    return Field(f.grid, out * (f.grid.size * f.grid.freq_cell), PHYSICAL)


def spectral_multiply(f: Field, multiplier: np.ndarray) -> Field:
    """Apply a Fourier multiplier sampled on the frequency lattice."""
    spec = forward_ft(f)
    return inverse_ft(spec.replace(spec.values * multiplier))


def lp_norm(f: Field, p: float) -> float:
    """Riemann-sum ``L^p`` quasi-norm; uses the cell of the field's representation."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    cell = f.grid.cell if f.space == PHYSICAL else f.grid.freq_cell
    if p == 2:
        return float(np.sqrt(np.vdot(a, a).real * cell))
    return float((np.sum(a**p) * cell) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class Symbol:
    """Samples of an m-linear multiplier on the product frequency lattice.

    A symbol is stored either densely, as an array over ``m * n`` axes, or as a
    tensor product of ``m`` factors, each an array over the ``n`` axes of one
    frequency variable. Dense storage requires ``m * n <= 4``.

    ``meta`` carries provenance used by decompositions (for example the parent
    symbol of a piece produced by ``kappa_decompose``).
    """

    grid: Grid
    m: int
    values: np.ndarray | None = None
    factors: tuple[np.ndarray, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be positive")
        if (self.values is None) == (self.factors is None):
            raise ValueError("give exactly one of values or factors")
        if self.values is not None:
            if self.m * self.grid.dims > 4:
                raise ValueError("dense symbols require m*n <= 4")
            vals = np.asarray(self.values, dtype=complex)
            if vals.size != self.grid.size**self.m:
                raise ValueError(f"expected {self.grid.size ** self.m} samples, got {vals.size}")
            vals = vals.reshape(self.grid.shape * self.m)
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)
        else:
            if len(self.factors) != self.m:
                raise ValueError("need one factor per frequency variable")
            facs = []
            for fac in self.factors:
                arr = np.asarray(fac, dtype=complex).reshape(self.grid.shape)
                arr.setflags(write=False)
                facs.append(arr)
            object.__setattr__(self, "factors", tuple(facs))

    @property
    def n(self) -> int:
        return self.grid.dims

    @property
    def separable(self) -> bool:
        return self.factors is not None

    @property
    def product_grid(self) -> Grid:
        """The grid on ``(R^n)^m`` whose physical lattice carries the symbol."""
        return make_grid(self.m * self.n, self.grid.points, self.grid.points / self.grid.length)

    def dense(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        if self.m * self.n > 4:
            raise ValueError("cannot densify: m*n > 4")
        out = self.factors[0]
        for fac in self.factors[1:]:
            out = np.multiply.outer(out, fac)
        return out

    def as_dense(self) -> "Symbol":
        return Symbol(self.grid, self.m, values=self.dense(), meta=dict(self.meta))

    def scaled(self, c: complex) -> "Symbol":
        if self.separable:
            facs = (self.factors[0] * c,) + self.factors[1:]
            return Symbol(self.grid, self.m, factors=facs, meta=dict(self.meta))
        return Symbol(self.grid, self.m, values=self.values * c, meta=dict(self.meta))

    def freq_coords(self) -> list[np.ndarray]:
        """Coordinate arrays over the full product lattice (dense layout)."""
        axis = self.grid.freq_axis()
        return list(np.meshgrid(*([axis] * (self.m * self.n)), indexing="ij"))

    def block_radii(self) -> list[np.ndarray]:
        """``|xi_k|`` for each frequency variable, over the dense product lattice."""
        c = self.freq_coords()
        n = self.n
        return [_norm(c[k * n:(k + 1) * n]) for k in range(self.m)]


def symbol_from_function(fn: Callable[..., np.ndarray], grid: Grid, m: int, **meta) -> Symbol:
    """Sample ``fn(xi_1, ..., xi_{m n})`` on the product frequency lattice."""
    axis = grid.freq_axis()
    coords = np.meshgrid(*([axis] * (m * grid.dims)), indexing="ij")
    vals = np.broadcast_to(np.asarray(fn(*coords), dtype=complex), coords[0].shape)
    return Symbol(grid, m, values=np.array(vals), meta=dict(meta, fn=fn))


# serialization ---------------------------------------------------------------

def write_field(path: str | Path, obj: Field | Symbol, precision: str = "complex128") -> None:
    """Binary dump: 32-byte header followed by little-endian complex pairs."""
    dtype = np.dtype(precision).newbyteorder("<")
    if dtype.kind != "c":
        raise ValueError("precision must be complex64 or complex128")
    if isinstance(obj, Symbol):
        vals, space, m = obj.dense(), SYMBOL, obj.m
    else:
        vals, space, m = obj.values, obj.space, 1
    g = obj.grid
    header = _HEADER.pack(_MAGIC, g.dims, m, _SPACE_CODES[space], dtype.itemsize, g.points, g.length)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(vals, dtype=dtype).tobytes())


def read_field(path: str | Path) -> Field | Symbol:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, dims, m, space, itemsize, points, length = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    dtype = {8: "<c8", 16: "<c16"}.get(itemsize)
    if dtype is None or space not in _SPACE_NAMES:
        raise ValueError(f"{path}: corrupt header")
    grid = make_grid(dims, points, length)
    vals = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size).astype(complex)
    name = _SPACE_NAMES[space]
    if name == SYMBOL:
        return Symbol(grid, m, values=vals)
    return Field(grid, vals, name)


def export_csv(path: str | Path, obj: Field | Symbol) -> None:
    """Write ``i_0, ..., i_{d-1}, re, im`` rows in C order."""
    vals = obj.dense() if isinstance(obj, Symbol) else obj.values
    idx = np.indices(vals.shape).reshape(vals.ndim, -1).T
    flat = vals.reshape(-1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"i{k}" for k in range(vals.ndim)] + ["re", "im"])
        for row, v in zip(idx, flat):
            w.writerow([*map(int, row), repr(float(v.real)), repr(float(v.imag))])
