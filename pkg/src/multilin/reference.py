"""Direct-summation evaluation of multilinear multipliers, for cross-checking."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .grid import SPECTRAL, Field, Symbol, forward_ft


def direct_multiplier(sigma: Symbol, fs: Sequence[Field]) -> np.ndarray:
    """``dxi^{mn} sum_xi sigma(xi) prod f_k^(xi_k) exp(2 pi i x . sum xi_k)`` at every grid point.

    Cost ``O(P^{(m+1) n})``; meant for ``P <= 16``.
    """
    g = sigma.grid
    n, m = g.dims, sigma.m
    hats = [f.values if f.space == SPECTRAL else forward_ft(f).values for f in fs]
    G = sigma.dense().copy()
    for k, h in enumerate(hats):
        shape = [1] * (m * n)
        shape[k * n:(k + 1) * n] = g.shape
        G = G * h.reshape(shape)
    freqs = [c.reshape(-1) for c in sigma.freq_coords()]
    eta = [sum(freqs[k * n + a] for k in range(m)) for a in range(n)]
    Gf = G.reshape(-1)
    xs = [c.reshape(-1) for c in g.coords()]
    out = np.empty(g.size, dtype=complex)
    for i in range(g.size):
        phase = sum(xs[a][i] * eta[a] for a in range(n))
        out[i] = np.sum(Gf * np.exp(2j * np.pi * phase))
    return out.reshape(g.shape) * g.freq_cell**m
