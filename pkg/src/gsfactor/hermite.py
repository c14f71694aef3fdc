"""Hermite functions, Gauss-Hermite quadrature and Hermite transforms.

Coefficient arrays for a :class:`HermiteBasis` of dimension ``d`` and
truncation ``N`` have shape ``(N + 1,) * d``; their C-order ravel is the
lexicographic order on multi-indices used everywhere else in the package.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _backend
from .errors import ValidationError

__all__ = [
    "MultiIndex",
    "HermiteBasis",
    "QuadratureRule",
    "hermite_eval",
    "hermite_eval_multi",
    "hermite_table",
    "gauss_hermite_rule",
    "analyze",
    "synthesize",
    "fourier_coeffs",
]


class MultiIndex(tuple):
    """Tuple of non-negative integers indexing the tensor Hermite basis."""

    def __new__(cls, entries: Sequence[int] | int):
        if isinstance(entries, (int, np.integer)):
            entries = (entries,)
        entries = tuple(int(e) for e in entries)
        if not entries:
            raise ValidationError("multi-index must have dimension >= 1")
        if any(e < 0 for e in entries):
            raise ValidationError(f"negative multi-index entry in {entries}")
        return super().__new__(cls, entries)

    @property
    def modulus(self) -> int:
        return sum(self)

    @property
    def dim(self) -> int:
        return len(self)


@dataclass(frozen=True)
class HermiteBasis:
    """Tensor Hermite basis with orders ``0..trunc`` on each of ``dim`` axes."""

    dim: int
    trunc: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("basis dimension must be >= 1")
        if self.trunc < 0:
            raise ValidationError("truncation must be >= 0")

    @property
    def size_per_axis(self) -> int:
        return self.trunc + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.trunc + 1,) * self.dim

    def indices(self):
        """All multi-indices of the basis in lexicographic order."""
        return [MultiIndex(a) for a in itertools.product(range(self.trunc + 1), repeat=self.dim)]

    def moduli(self) -> np.ndarray:
        """Array of ``|alpha|`` with the basis coefficient shape."""
        return np.sum(np.indices(self.shape), axis=0)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight ``exp(-x^2)``.

    ``scaled_weights`` holds ``w_i * exp(x_i^2)``, computed directly so that
    it stays finite for large nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def order(self) -> int:
        return int(self.nodes.size)


def hermite_table(n_max: int, x) -> np.ndarray:
    """Return ``h_n(x_i)`` for ``n = 0..n_max`` as an array ``(n_max + 1, len(x))``.

    Uses the normalized three-term recurrence; points with ``|x| > 20`` carry
    the Gaussian factor in log form so that high orders do not underflow
    prematurely.
    """
    if n_max < 0:
        raise ValidationError("order must be >= 0")
    return _backend.hermite_table(int(n_max), x)


def hermite_eval(n: int, x: float) -> float:
    """Normalized Hermite function ``h_n(x)``."""
    if n < 0:
        raise ValidationError("order must be >= 0")
    if not np.isfinite(x):
        raise ValidationError("x must be finite")
    return float(hermite_table(n, np.array([x], dtype=float))[n, 0])


def hermite_eval_multi(alpha, x) -> float:
    """Product ``prod_k h_{alpha_k}(x_k)``."""
    alpha = MultiIndex(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != alpha.dim:
        raise ValidationError(f"dimension mismatch: alpha has {alpha.dim}, x has {x.size}")
    return float(np.prod([hermite_eval(a, xk) for a, xk in zip(alpha, x)]))


def gauss_hermite_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Hermite rule via Golub-Welsch, nodes ascending."""
    if n < 1:
        raise ValidationError("quadrature order must be >= 1")
    if n == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, n) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
        nodes = np.sort(nodes)
        nodes = 0.5 * (nodes - nodes[::-1])
        if n % 2:
            nodes[n // 2] = 0.0
    # Christoffel identities: w_i = 1/sum p_k(x_i)^2 and w_i e^{x_i^2} = 1/sum h_k(x_i)^2
    weights = _backend.inv_christoffel(n, nodes)
    weights = 0.5 * (weights + weights[::-1])
    tab = hermite_table(n - 1, nodes)
    scaled = 1.0 / np.sum(tab * tab, axis=0)
    scaled = 0.5 * (scaled + scaled[::-1])
    return QuadratureRule(nodes=nodes, weights=weights, scaled_weights=scaled)


def _axis_matrices(basis: HermiteBasis, rule: QuadratureRule) -> np.ndarray:
    # (N+1, n): scaled weight times h_k at each node
    return hermite_table(basis.trunc, rule.nodes) * rule.scaled_weights


def analyze(f: Callable | np.ndarray, basis: HermiteBasis, rule: QuadratureRule | None = None) -> np.ndarray:
    """Hermite coefficients ``c_alpha = (f, h_alpha)`` by tensor Gauss-Hermite quadrature.

    ``f`` is either a callable taking ``dim`` coordinate arrays (broadcast on
    the tensor node grid) or an array of samples of shape ``(n,) * dim`` at
    the tensor nodes. The default rule has ``2 * (N + 1)`` points.
    """
    if rule is None:
        rule = gauss_hermite_rule(2 * basis.size_per_axis)
    if rule.order < basis.size_per_axis:
        raise ValidationError(
            f"rule of order {rule.order} too small for truncation {basis.trunc}")
    n = rule.order
    if callable(f):
        grids = np.meshgrid(*([rule.nodes] * basis.dim), indexing="ij")
        samples = np.asarray(f(*grids))
        samples = np.broadcast_to(samples, (n,) * basis.dim)
    else:
        samples = np.asarray(f)
        if samples.shape != (n,) * basis.dim:
            raise ValidationError(
                f"samples have shape {samples.shape}, expected {(n,) * basis.dim}")
    mat = _axis_matrices(basis, rule)
    out = samples
    for _ in range(basis.dim):
        # contract the leading node axis, append the coefficient axis
        out = np.tensordot(out, mat, axes=([0], [1]))
    return out


def synthesize(c: np.ndarray, basis: HermiteBasis, x) -> np.ndarray:
    """Evaluate ``sum_alpha c_alpha h_alpha`` at a point or on a tensor grid.

    In one dimension ``x`` is a scalar or a 1-D array of points. In ``d``
    dimensions ``x`` is either a point (``d`` scalars, scalar result) or a
    sequence of ``d`` 1-D arrays (result shape ``(len(x_1), ..., len(x_d))``).
    """
    c = np.asarray(c)
    if c.shape != basis.shape:
        raise ValidationError(f"coefficients have shape {c.shape}, expected {basis.shape}")
    if basis.dim == 1:
        point = np.ndim(x) == 0
        axes = [np.atleast_1d(np.asarray(x, dtype=float))]
    else:
        if len(x) != basis.dim:
            raise ValidationError("need one coordinate per dimension")
        point = all(np.ndim(xk) == 0 for xk in x)
        axes = [np.atleast_1d(np.asarray(xk, dtype=float)).ravel() for xk in x]
    out = c
    for ax in axes:
        out = np.tensordot(out, hermite_table(basis.trunc, ax), axes=([0], [0]))
    if point:
        return out.reshape(-1)[0]
    return out


def fourier_coeffs(c: np.ndarray) -> np.ndarray:
    """Apply the unitary Fourier transform on Hermite coefficients.

    Each ``h_alpha`` is an eigenfunction with eigenvalue ``(-i)^|alpha|``.
    """
    c = np.asarray(c)
    if c.ndim == 0:
        raise ValidationError("coefficient array must have at least one axis")
    moduli = np.sum(np.indices(c.shape), axis=0)
    phase = np.array([1, -1j, -1, 1j])[moduli % 4]
    return c * phase
