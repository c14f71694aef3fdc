"""Weighted Hermite-type Hilbert spaces, singular values and Schatten classes.

A Hermite-type space is modelled by positive basis weights ``w_alpha =
||h_alpha||_H``; the normalized functions ``h_alpha / w_alpha`` form an
orthonormal basis. An operator with coefficient tensor ``a`` from ``H1`` to
``H2`` then has the matrix

    M[alpha, beta] = w2[alpha] * a[alpha, beta] / w1[beta]

in those bases, and all Schatten quantities are computed from ``M``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .coefftensor import CoeffTensor, matmul
from .errors import DegenerateFitError, ValidationError
from .hermite import MultiIndex

__all__ = [
    "HermiteWeight",
    "OperatorMatrix",
    "SingularSpectrum",
    "CheckReport",
    "space_norm",
    "operator_matrix",
    "singular_values",
    "schatten_norm",
    "holder_exponent",
    "holder_check",
    "hs_identity_check",
    "embedding_constants",
    "embedding_monotonicity_check",
    "decay_fit",
    "partial_sum_ratio",
    "HOLDER_SLACK",
    "FIT_RTOL",
]

HOLDER_SLACK = 1e-10
# singular values below FIT_RTOL * sigma_1 are treated as SVD round-off in fits
FIT_RTOL = 1e-12
FIT_ABS_FLOOR = 1e-250
FIT_MIN_POINTS = 8


class HermiteWeight:
    """Permutation-symmetric positive weights ``alpha -> w_alpha``.

    Weights are stored under the sorted multi-index, so ``w_alpha`` and
    ``w_{pi(alpha)}`` always agree. Indices without an explicit weight get
    ``default``; with ``default=None`` a missing index is an error.
    """

    def __init__(self, dim: int, weights: Mapping | Sequence = (), default: float | None = 1.0):
        if dim < 1:
            raise ValidationError("weight dimension must be >= 1")
        self.dim = int(dim)
        if default is not None:
            default = float(default)
            if not (default > 0 and math.isfinite(default)):
                raise ValidationError("default weight must be positive and finite")
        self.default = default
        items = weights.items() if isinstance(weights, Mapping) else weights
        store: dict[tuple, float] = {}
        for alpha, w in items:
            alpha = MultiIndex(alpha)
            if alpha.dim != self.dim:
                raise ValidationError(f"weight index {tuple(alpha)} has dimension {alpha.dim}, expected {dim}")
            w = float(w)
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError(f"weight at {tuple(alpha)} must be positive and finite, got {w}")
            key = tuple(sorted(alpha))
            if key in store and store[key] != w:
                raise ValidationError(
                    f"weights not permutation symmetric at {tuple(alpha)}: {store[key]} vs {w}")
            store[key] = w
        self._weights = dict(sorted(store.items()))

    @classmethod
    def unit(cls, dim: int) -> "HermiteWeight":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: float) -> "HermiteWeight":
        return cls(dim, default=value)

    @classmethod
    def from_function(cls, dim: int, trunc: int, func) -> "HermiteWeight":
        """Weights ``func(alpha)`` on the box ``0..trunc``; ``func`` must be symmetric."""
        import itertools
        items = [(a, func(a)) for a in itertools.combinations_with_replacement(range(trunc + 1), dim)]
        return cls(dim, items)

    def __call__(self, alpha) -> float:
        key = tuple(sorted(MultiIndex(alpha)))
        w = self._weights.get(key, self.default)
        if w is None:
            raise ValidationError(f"no weight for index {key}")
        return w

    def vector(self, indices) -> np.ndarray:
        """Weights for a list of multi-indices, as a float array."""
        return np.array([self(a) for a in indices], dtype=float)

    def to_dict(self):
        return {"dim": self.dim, "default": self.default,
                "weights": [[list(a), w] for a, w in self._weights.items()]}

    @classmethod
    def from_dict(cls, obj, dim: int | None = None) -> "HermiteWeight":
        """Parse ``{"dim", "default", "weights": [[alpha, w], ...]}``.

        A bare list of ``[alpha, w]`` pairs, or an object whose keys are
        JSON arrays (``"[0, 1]"``) or comma lists (``"0,1"``), is accepted
        too; the dimension is then taken from the entries or from ``dim``.
        """
        try:
            default = 1.0
            if isinstance(obj, Mapping) and "weights" in obj:
                dim = obj.get("dim", dim)
                default = obj.get("default", 1.0)
                pairs = obj["weights"]
            elif isinstance(obj, Mapping):
                pairs = [(_parse_key(k), v) for k, v in obj.items()]
            else:
                pairs = list(obj)
            pairs = [(tuple(int(i) for i in (a if isinstance(a, (list, tuple)) else [a])), v)
                     for a, v in pairs]
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed weight data: {exc}") from exc
        if dim is None:
            if not pairs:
                raise ValidationError("cannot infer weight dimension from an empty map")
            dim = len(pairs[0][0])
        return cls(int(dim), pairs, default=default)

    @classmethod
    def from_json(cls, text: str, dim: int | None = None) -> "HermiteWeight":
        try:
            return cls.from_dict(json.loads(text), dim=dim)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc

    def __eq__(self, other):
        return (isinstance(other, HermiteWeight) and self.dim == other.dim
                and self.default == other.default and self._weights == other._weights)

    def __repr__(self):
        return f"HermiteWeight(dim={self.dim}, n={len(self._weights)}, default={self.default})"


def _parse_key(key: str):
    key = key.strip()
    if key.startswith("["):
        return json.loads(key)
    return [int(k) for k in key.split(",")]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Matrix of an operator in the normalized bases of two weighted spaces."""

    rows: list
    cols: list
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.rows), len(self.cols)):
            raise ValidationError("operator matrix shape does not match its index lists")


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """Non-increasing singular values."""

    sigma: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if sig.ndim != 1 or np.any(sig < 0) or np.any(np.diff(sig) > 0):
            raise ValidationError("singular values must be a non-increasing list of non-negative reals")
        object.__setattr__(self, "sigma", sig)

    def __len__(self):
        return int(self.sigma.size)

    def to_dict(self):
        return {"sigma": self.sigma.tolist()}


@dataclass(frozen=True)
class CheckReport:
    check: str
    inputs_digest: str
    lhs: float
    rhs: float
    constant: float
    passed: bool

    def to_dict(self):
        return {"check": self.check, "inputs_digest": self.inputs_digest,
                "lhs": _num(self.lhs), "rhs": _num(self.rhs),
                "constant": _num(self.constant), "pass": bool(self.passed)}


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, CoeffTensor):
            text = p.to_json()
        elif isinstance(p, HermiteWeight):
            text = json.dumps(p.to_dict(), separators=(",", ":"))
        else:
            text = json.dumps(p, separators=(",", ":"), default=str)
        h.update(text.encode())
        h.update(b"\0")
    return h.hexdigest()


# -- norms and matrices ---------------------------------------------------------------


def space_norm(c, W: HermiteWeight, indices=None) -> float:
    """``sqrt(sum |c_alpha|^2 w_alpha^2)``.

    ``c`` is either a mapping ``alpha -> c_alpha`` or an array whose entries
    follow ``indices`` (default: the lexicographic box of a coefficient
    array of shape ``(N + 1,) * dim``).
    """
    if isinstance(c, Mapping):
        keys = list(c.keys())
        vals = np.array([c[k] for k in keys], dtype=complex)
    else:
        arr = np.asarray(c)
        if indices is None:
            if arr.ndim != W.dim:
                raise ValidationError(f"coefficient array has {arr.ndim} axes, weights have dim {W.dim}")
            indices = [tuple(i) for i in np.ndindex(arr.shape)]
        keys = list(indices)
        vals = arr.reshape(-1).astype(complex)
        if vals.size != len(keys):
            raise ValidationError("coefficient count does not match the index list")
    w = W.vector(keys)
    return float(np.sqrt(np.sum(np.abs(vals) ** 2 * w * w)))


def operator_matrix(A: CoeffTensor, W1: HermiteWeight, W2: HermiteWeight) -> OperatorMatrix:
    """``M[alpha, beta] = w2[alpha] a[alpha, beta] / w1[beta]`` over the truncation box."""
    if W1.dim != A.d_right or W2.dim != A.d_left:
        raise ValidationError(
            f"weight dimensions ({W1.dim}, {W2.dim}) do not match tensor ({A.d_right}, {A.d_left})")
    rows = A.row_indices()
    cols = A.col_indices()
    w2 = W2.vector(rows)
    w1 = W1.vector(cols)
    M = A.to_dense() * (w2[:, None] / w1[None, :])
    return OperatorMatrix(rows, cols, M)


def singular_values(M) -> SingularSpectrum:
    """Singular values of ``M`` (an :class:`OperatorMatrix` or array), descending.

    By Eckart-Young-Mirsky the ``j``-th value is the operator-norm distance
    from ``M`` to the matrices of rank below ``j``.
    """
    vals = M.values if isinstance(M, OperatorMatrix) else np.asarray(M)
    if vals.ndim != 2:
        raise ValidationError("need a matrix")
    if vals.size == 0:
        return SingularSpectrum(np.zeros(0))
    if not np.all(np.isfinite(vals)):
        raise ValidationError("matrix has non-finite entries")
    sig = np.linalg.svd(vals, compute_uv=False)
    # LAPACK already sorts; the stable sort only guards the contract
    sig = -np.sort(-sig, kind="stable")
    return SingularSpectrum(sig)


def _as_sigma(sigma):
    return sigma.sigma if isinstance(sigma, SingularSpectrum) else np.asarray(sigma, dtype=float)


def _check_p(p):
    p = float(p)
    if not p > 0:
        raise ValidationError(f"Schatten order must be > 0 or inf, got {p}")
    return p


def schatten_norm(sigma, p) -> float:
    """l^p (quasi-)norm of the singular values; ``p = inf`` gives ``sigma_1``."""
    p = _check_p(p)
    sig = _as_sigma(sigma)
    if sig.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(sig))
    top = float(np.max(sig))
    if top == 0.0:
        return 0.0
    # scale first so small p does not underflow
    return top * float(np.sum((sig / top) ** p) ** (1.0 / p))


def holder_exponent(p1, p2) -> float:
    """``r`` with ``1/r = 1/p1 + 1/p2``."""
    p1, p2 = _check_p(p1), _check_p(p2)
    inv = 1.0 / p1 + 1.0 / p2
    return math.inf if inv == 0 else 1.0 / inv


# -- verification reports -----------------------------------------------------------------


def holder_check(A1: CoeffTensor, A2: CoeffTensor, weights, p1, p2) -> CheckReport:
    """Compare ``||T2 T1||_{I_r}`` with ``||T1||_{I_p1} ||T2||_{I_p2}``.

    ``weights = (W1, W2, W3)`` with ``T1: H1 -> H2`` and ``T2: H2 -> H3``.
    The constant is 1 in the Hilbert model.
    """
    W1, W2, W3 = weights
    r = holder_exponent(p1, p2)
    n1 = schatten_norm(singular_values(operator_matrix(A1, W1, W2)), p1)
    n2 = schatten_norm(singular_values(operator_matrix(A2, W2, W3)), p2)
    lhs = schatten_norm(singular_values(operator_matrix(matmul(A2, A1), W1, W3)), r)
    rhs = n1 * n2
    return CheckReport("hoelder", _digest(A1, A2, W1, W2, W3, [_num(p1), _num(p2)]),
                       lhs, rhs, 1.0, lhs <= rhs + HOLDER_SLACK)


def hs_identity_check(A: CoeffTensor, W1: HermiteWeight, W2: HermiteWeight, tol: float = 1e-12):
    """Hilbert-Schmidt norm from the spectrum versus the weighted kernel norm.

    Returns ``(lhs, rhs, gap)``: ``lhs`` is the l^2 norm of the singular
    values, ``rhs`` the Frobenius norm of the weighted matrix (the kernel's
    norm in ``H2 (x) H1'`` with dual weights ``1/w1``).
    """
    M = operator_matrix(A, W1, W2)
    lhs = schatten_norm(singular_values(M), 2)
    rhs = float(np.linalg.norm(M.values))
    return lhs, rhs, abs(lhs - rhs)


def hs_identity_report(A: CoeffTensor, W1: HermiteWeight, W2: HermiteWeight, tol: float = 1e-12) -> CheckReport:
    lhs, rhs, gap = hs_identity_check(A, W1, W2)
    return CheckReport("hs", _digest(A, W1, W2), lhs, rhs, 1.0, gap <= tol)


def embedding_constants(A: CoeffTensor, B1, B2, C1, C2):
    """``(C_a, C_b)``: ``C_a = max w_B1 / w_C1`` over inputs, ``C_b = max w_C2 / w_B2`` over outputs."""
    cols = A.col_indices()
    rows = A.row_indices()
    ca = float(np.max(B1.vector(cols) / C1.vector(cols)))
    cb = float(np.max(C2.vector(rows) / B2.vector(rows)))
    return ca, cb


def embedding_monotonicity_check(A: CoeffTensor, inner, outer) -> CheckReport:
    """Check ``sigma_j(C1, C2, T) <= C_a C_b sigma_j(B1, B2, T)`` for every ``j``.

    ``inner = (B1, B2)`` and ``outer = (C1, C2)``. The report's ``lhs`` is
    the largest observed ratio ``sigma_j(C) / sigma_j(B)`` (over ``j`` with
    ``sigma_j(B) > 0``) and ``rhs`` the constant ``C_a C_b``.
    """
    B1, B2 = inner
    C1, C2 = outer
    ca, cb = embedding_constants(A, B1, B2, C1, C2)
    const = ca * cb
    sb = singular_values(operator_matrix(A, B1, B2)).sigma
    sc = singular_values(operator_matrix(A, C1, C2)).sigma
    ok = bool(np.all(sc <= const * sb + HOLDER_SLACK))
    pos = sb > 0
    ratio = float(np.max(sc[pos] / sb[pos])) if np.any(pos) else 0.0
    return CheckReport("embed", _digest(A, B1, B2, C1, C2), ratio, const, const, ok)


def _usable(sig):
    sig = _as_sigma(sig)
    if sig.size == 0:
        return sig
    floor = max(FIT_ABS_FLOOR, FIT_RTOL * float(sig[0]))
    return sig[sig > floor]


def decay_fit(sigma, s: float):
    """Fit ``log sigma_j = log c - rho j^{1/(2s)}`` by least squares.

    Only values above ``max(1e-250, 1e-12 sigma_1)`` enter; below that the
    spectrum of a dense matrix is SVD round-off. Returns
    ``(c, rho, r_squared)``.

    Raises
    ------
    DegenerateFitError
        Fewer than 8 usable values.
    """
    if not s >= 0.5:
        raise ValidationError("s must be >= 1/2")
    sig = _usable(sigma)
    if sig.size < FIT_MIN_POINTS:
        raise DegenerateFitError(
            f"decay fit needs {FIT_MIN_POINTS} values above the noise floor, got {sig.size}")
    j = np.arange(1, sig.size + 1, dtype=float) ** (1.0 / (2.0 * s))
    y = np.log(sig)
    X = np.column_stack([np.ones_like(j), -j])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(math.exp(coef[0])), float(coef[1]), r2


def partial_sum_ratio(sigma, p: float = 0.1) -> float:
    """Largest ratio ``sigma_{j+1}^p / sigma_j^p`` over the usable tail.

    A value below 1 means the terms of ``sum sigma_j^p`` shrink
    geometrically there (ratio test).
    """
    p = _check_p(p)
    sig = _usable(sigma)
    if sig.size < 2:
        raise DegenerateFitError("ratio test needs at least two usable values")
    return float(np.max((sig[1:] / sig[:-1]) ** p))
