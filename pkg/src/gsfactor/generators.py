"""Test-data generators: Mehler kernels, random Gelfand-Shilov tensors, symbols."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .coefftensor import CoeffTensor
from .errors import ValidationError
from .hermite import MultiIndex


def mehler(tau: float, n: int) -> CoeffTensor:
    """Diagonal tensor ``a[k, k] = exp(-(2k + 1) tau)``, ``k = 0..n`` (d = 1)."""
    if not tau > 0:
        raise ValidationError("tau must be > 0")
    if n < 0:
        raise ValidationError("truncation must be >= 0")
    entries = {((k,), (k,)): math.exp(-(2 * k + 1) * tau) for k in range(n + 1)}
    return CoeffTensor(1, 1, n, n, entries)


def random_gs(n: int, seed: int, s: float = 0.5, r: float = 1.0, d_left: int = 1,
              d_right: int = 1, n_entries: int | None = None) -> CoeffTensor:
    """Random tensor ``a = u exp(-r (|alpha|^{1/2s} + |beta|^{1/2s}))``.

    ``u`` is uniform on the complex unit disk. With ``n_entries`` set, only
    that many positions of the truncation box (drawn without replacement)
    are filled; otherwise the box is dense.
    """
    if seed is None:
        raise ValidationError("random-gs requires a seed")
    if n < 0 or r <= 0 or s < 0.5:
        raise ValidationError("need n >= 0, r > 0 and s >= 1/2")
    rng = np.random.default_rng(int(seed))
    rows = _box(d_left, n)
    cols = _box(d_right, n)
    total = len(rows) * len(cols)
    if n_entries is None:
        flat = np.arange(total)
    else:
        if not 0 < n_entries <= total:
            raise ValidationError(f"n_entries must be in 1..{total}")
        flat = np.sort(rng.choice(total, size=n_entries, replace=False))
    radius = np.sqrt(rng.random(flat.size))
    angle = 2.0 * np.pi * rng.random(flat.size)
    u = radius * np.exp(1j * angle)
    entries = {}
    p = 1.0 / (2.0 * s)
    for k, f in enumerate(flat):
        alpha, beta = rows[f // len(cols)], cols[f % len(cols)]
        w = sum(alpha) ** p + sum(beta) ** p
        entries[(alpha, beta)] = u[k] * math.exp(-r * w)
    return CoeffTensor(d_left, d_right, n, n, entries)


def rank_one(alpha, beta, trunc: int | None = None) -> CoeffTensor:
    """Single entry 1 at ``(alpha, beta)``: the kernel ``h_alpha (x) h_beta``."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    if trunc is None:
        trunc = max(max(alpha), max(beta))
    return CoeffTensor(alpha.dim, beta.dim, trunc, trunc, {(alpha, beta): 1.0})


def _box(dim, n):
    return [tuple(i) for i in itertools.product(range(n + 1), repeat=dim)]


def projector_symbol(grid):
    """Weyl symbol ``2 exp(-(x^2 + xi^2))`` of the projection onto ``h_0``."""
    from .weyl import GridSymbol
    x, xi = grid.mesh()
    return GridSymbol(grid, 2.0 * np.exp(-(x * x + xi * xi)) + 0j)
