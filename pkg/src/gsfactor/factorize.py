"""Constructive factorization ``T = T_2 o T_1`` of operators given by Hermite tensors.

Each branch returns a :class:`FactorPair` ``(B, C)`` with ``matmul(B, C) == A``
up to rounding, where ``C`` is a positive Hermite diagonal operator:

* ``roumieu``:  ``b = a exp(r |beta|^{1/2s} / 2)``, ``c = exp(-r |alpha|^{1/2s} / 2)``;
* ``beurling``: column blocks ``I_j`` from the thresholds ``Theta_N``, then
  ``b = a exp(j |beta|^{1/2s})``, ``c = exp(-j |beta|^{1/2s})`` on ``I_j``;
* ``schwartz``: the same block construction with polynomial weights
  ``<beta>^j`` and thresholds ``(<alpha><beta>)^{-2(N+1)}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefftensor import (CoeffTensor, DecayProfile, _box, adjoint, estimate_decay,
                          matmul, reconstruction_error)
from .errors import NumericalError, ValidationError

__all__ = [
    "FactorPair",
    "FactorChain",
    "Partition",
    "HermiteDiagonal",
    "factorize",
    "factorize_roumieu",
    "factorize_beurling",
    "factorize_schwartz",
    "theta_partition",
    "extend_inner_dim",
    "is_positive_hermite_diagonal",
    "factor_chain",
    "verify_pair",
]

BRANCHES = ("schwartz", "roumieu", "beurling")
# exp(-x) for x beyond this underflows past the storage cut-off
_MAX_EXPONENT = 690.0
POSITIVITY_TOL = 1e-14


@dataclass(frozen=True)
class HermiteDiagonal:
    """Eigenvalues of ``T_0`` and the Hermite order of ``g`` in ``T = T_0 (x) g``."""

    eigenvalues: dict
    tensor_order: tuple | None = None


@dataclass(frozen=True)
class Partition:
    """Thresholds ``theta[N]`` (``-1`` for the empty set) and block of each column index."""

    theta: list
    blocks: dict
    jmax: int

    def members(self, j):
        return [b for b, k in self.blocks.items() if k == j]

    def to_dict(self):
        return {"theta": list(self.theta), "jmax": self.jmax,
                "blocks": [[list(b), j] for b, j in sorted(self.blocks.items())]}


@dataclass(frozen=True)
class FactorPair:
    """Factors ``B`` (left, ``T_2``) and ``C`` (right, ``T_1``) of a tensor.

    ``diagonal`` names the factor that is Hermite diagonal: ``"C"`` normally,
    ``"B"`` when the pair came from the adjoint construction.
    """

    B: CoeffTensor
    C: CoeffTensor
    branch: str
    params: dict = field(default_factory=dict)
    d0: int = 1
    diagonal: str = "C"
    tensor_order: tuple | None = None

    def product(self) -> CoeffTensor:
        return matmul(self.B, self.C)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.tensor_order is not None:
            params["tensor_order"] = list(self.tensor_order)
        params["diagonal"] = self.diagonal
        return {"branch": self.branch, "params": params, "d0": self.d0,
                "B": self.B.to_dict(), "C": self.C.to_dict()}

    @classmethod
    def from_dict(cls, obj) -> "FactorPair":
        params = dict(obj.get("params", {}))
        order = params.pop("tensor_order", None)
        diagonal = params.pop("diagonal", "C")
        return cls(B=CoeffTensor.from_dict(obj["B"]), C=CoeffTensor.from_dict(obj["C"]),
                   branch=obj["branch"], params=params, d0=int(obj["d0"]),
                   diagonal=diagonal, tensor_order=None if order is None else tuple(order))


@dataclass(frozen=True)
class FactorChain:
    """Factors ``K_N, ..., K_1`` with ``K_N o ... o K_1`` equal to the input."""

    factors: list
    branch: str
    diagnostics: list

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    def product(self) -> CoeffTensor:
        out = self.factors[-1]
        for f in reversed(self.factors[:-1]):
            out = matmul(f, out)
        return out


def _moduli(indices):
    return np.array([sum(i) for i in indices], dtype=float)


def _exp_weight(moduli, s):
    return np.power(moduli, 1.0 / (2.0 * s))


def _log_bracket(moduli):
    return 0.5 * np.log1p(moduli * moduli)


def _check_s(s):
    if s is None or not s >= 0.5:
        raise ValidationError(f"Gelfand-Shilov index s must be >= 1/2, got {s}")


def _diag(d, trunc, values, indices):
    return CoeffTensor(d, d, trunc, trunc, {(b, b): v for b, v in zip(indices, values)})


def _guard(exponents):
    if exponents.size and np.max(np.abs(exponents)) > _MAX_EXPONENT:
        raise NumericalError(
            "block weights exceed the floating-point range; reduce jmax or the truncation")


# -- Roumieu ------------------------------------------------------------------------


def factorize_roumieu(A: CoeffTensor, s: float, r: float | None = None) -> FactorPair:
    """Factor with ``b = a e^{r|beta|^{1/2s}/2}`` and diagonal ``c = e^{-r|alpha|^{1/2s}/2}``.

    ``r`` defaults to :func:`estimate_decay`'s rate; when that is 0 or
    infinite every positive rate is admissible at finite truncation and
    ``r = 1`` is used.
    """
    _check_s(s)
    source = "given"
    if r is None:
        r_hat = estimate_decay(A, s).r_hat
        if 0.0 < r_hat < math.inf:
            r, source = r_hat, "estimate"
        else:
            r, source = 1.0, "fallback"
    if not r > 0:
        raise ValidationError(f"r must be > 0, got {r}")
    cols = _box(A.trunc_right)
    half = 0.5 * r * _exp_weight(_moduli(cols), s)
    _guard(half)
    up = dict(zip(cols, np.exp(half)))
    B = A.with_entries({(a, b): v * up[b] for (a, b), v in A.items()})
    C = _diag(A.d_right, A.trunc_right, np.exp(-half), cols)
    return FactorPair(B, C, "roumieu", {"s": float(s), "r": float(r), "r_source": source},
                      d0=A.d_right)


# -- block partition ----------------------------------------------------------------


def theta_partition(A: CoeffTensor, s: float | None = None, jmax: int | None = None,
                    weight: str = "exponential") -> Partition:
    """Thresholds ``Theta_N`` and the column blocks ``I_j``.

    ``Theta_N`` is the largest ``|beta|`` with ``|a[alpha, beta]| >=
    exp(-2 (N + 1) (|alpha|^{1/2s} + |beta|^{1/2s}))`` for some ``alpha``
    (``weight="polynomial"`` uses ``(<alpha><beta>)^{-2(N+1)}``), or -1.
    ``I_1 = {|beta| <= Theta_1 + 1}`` and ``I_j`` collects the remaining
    ``beta`` with ``|beta| <= Theta_j + j``. Columns not covered by
    ``j <= jmax`` go to block ``jmax + 1``. With ``jmax=None`` blocks are
    built until every column is covered.
    """
    if weight == "exponential":
        _check_s(s)
    elif weight != "polynomial":
        raise ValidationError(f"unknown weight {weight!r}")
    if jmax is not None and jmax < 1:
        raise ValidationError("jmax must be >= 1")
    cols = _box(A.trunc_right)
    col_mod = np.array([sum(b) for b in cols])
    top = int(col_mod.max())

    if A.is_zero:
        n_theta = (jmax if jmax is not None else 1) + 1
        return Partition([-1] * n_theta, {b: 1 for b in cols}, jmax if jmax is not None else 1)

    alphas, betas, vals = A.arrays()
    ma = alphas.sum(axis=1).astype(float)
    mb = betas.sum(axis=1)
    if weight == "exponential":
        w = _exp_weight(ma, s) + _exp_weight(mb.astype(float), s)
    else:
        w = _log_bracket(ma) + _log_bracket(mb.astype(float))
    mag = np.abs(vals)

    def theta(n):
        with np.errstate(under="ignore"):
            ok = mag >= np.exp(-2.0 * (n + 1) * w)
        return int(mb[ok].max()) if ok.any() else -1

    thetas = [theta(0)]
    n = 0
    while True:
        n += 1
        thetas.append(theta(n))
        if jmax is not None:
            if n >= jmax:
                break
        elif thetas[n] + n >= top:
            break
    last = len(thetas) - 1 if jmax is None else jmax

    blocks = {}
    for b, m in zip(cols, col_mod):
        for j in range(1, last + 1):
            if m <= thetas[j] + j:
                blocks[b] = j
                break
        else:
            blocks[b] = last + 1
    return Partition(thetas, blocks, last)


def _block_factor(A, part, log_w, branch, params):
    cols = _box(A.trunc_right)
    expo = np.array([part.blocks[b] for b in cols], dtype=float) * log_w
    _guard(expo)
    up = dict(zip(cols, np.exp(expo)))
    B = A.with_entries({(a, b): v * up[b] for (a, b), v in A.items()})
    C = _diag(A.d_right, A.trunc_right, np.exp(-expo), cols)
    params = dict(params, jmax=part.jmax, theta=list(part.theta))
    return FactorPair(B, C, branch, params, d0=A.d_right)


def factorize_beurling(A: CoeffTensor, s: float, jmax: int | None = None) -> FactorPair:
    """Block factorization with weights ``exp(j |beta|^{1/2s})`` on ``I_j``."""
    _check_s(s)
    if A.is_zero:
        raise ValidationError("cannot factorize the zero tensor")
    part = theta_partition(A, s, jmax)
    cols = _box(A.trunc_right)
    return _block_factor(A, part, _exp_weight(_moduli(cols), s), "beurling", {"s": float(s)})


def factorize_schwartz(A: CoeffTensor, jmax: int | None = None) -> FactorPair:
    """Block factorization with polynomial weights ``<beta>^j`` on ``I_j``."""
    if A.is_zero:
        raise ValidationError("cannot factorize the zero tensor")
    part = theta_partition(A, None, jmax, weight="polynomial")
    cols = _box(A.trunc_right)
    return _block_factor(A, part, _log_bracket(_moduli(cols)), "schwartz", {})


# -- inner dimension ----------------------------------------------------------------


def extend_inner_dim(pair: FactorPair, d0: int) -> FactorPair:
    """Tensor both factors with ``h_0`` in ``d0 - pair.d0`` extra inner variables."""
    if d0 <= pair.d0:
        raise ValidationError(f"d0={d0} must exceed the current inner dimension {pair.d0}")
    extra = d0 - pair.d0
    zeros = (0,) * extra
    B, C = pair.B, pair.C
    C2 = CoeffTensor(d0, C.d_right, C.trunc_left + zeros, C.trunc_right,
                     {(a + zeros, b): v for (a, b), v in C.items()})
    B2 = CoeffTensor(B.d_left, d0, B.trunc_left, B.trunc_right + zeros,
                     {(a, b + zeros): v for (a, b), v in B.items()})
    order = (pair.tensor_order or ()) + zeros
    return FactorPair(B2, C2, pair.branch, dict(pair.params), d0=d0,
                      diagonal=pair.diagonal, tensor_order=order)


def is_positive_hermite_diagonal(C: CoeffTensor):
    """Check that ``C`` is ``T_0 (x) g`` with ``T_0`` diagonal and positive semi-definite.

    Returns ``(ok, HermiteDiagonal | None)``. When ``d_left > d_right`` the
    trailing ``d_left - d_right`` output indices must be one fixed Hermite
    order (the factor ``g``).
    """
    if C.d_left < C.d_right:
        return False, None
    split = C.d_right
    order = None
    eig = {}
    for (a, b), v in C.items():
        head, tail = a[:split], a[split:]
        if order is None:
            order = tail
        elif tail != order:
            return False, None
        if head != b:
            return False, None
        if abs(v.imag) > POSITIVITY_TOL or v.real < -POSITIVITY_TOL:
            return False, None
        eig[b] = v.real
    tensor_order = None
    if C.d_left > C.d_right:
        tensor_order = order if order is not None else (0,) * (C.d_left - C.d_right)
    return True, HermiteDiagonal(eig, tensor_order)


# -- dispatcher and chains ------------------------------------------------------------


def _direct(A, branch, s, r, jmax):
    if branch == "roumieu":
        return factorize_roumieu(A, s, r)
    if branch == "beurling":
        return factorize_beurling(A, s, jmax)
    return factorize_schwartz(A, jmax)


def factorize(A: CoeffTensor, branch: str, s: float | None = None, r: float | None = None,
              d0: int | None = None, jmax: int | None = None) -> FactorPair:
    """Factor ``A`` with inner dimension ``d0 >= min(d_left, d_right)``.

    ``d0 >= d_right`` factors directly (extending with ``h_0`` when larger);
    ``d_left <= d0 < d_right`` factors the adjoint and takes adjoints back, so
    the Hermite diagonal factor is then ``B``.
    """
    if branch not in BRANCHES:
        raise ValidationError(f"unknown branch {branch!r}; expected one of {BRANCHES}")
    if A.is_zero:
        raise ValidationError("cannot factorize the zero tensor")
    if r is not None and branch != "roumieu":
        raise ValidationError("r applies only to the roumieu branch")
    if d0 is None:
        d0 = A.d_right
    if d0 >= A.d_right:
        pair = _direct(A, branch, s, r, jmax)
        return pair if d0 == A.d_right else extend_inner_dim(pair, d0)
    if d0 >= A.d_left:
        inner = _direct(adjoint(A), branch, s, r, jmax)
        if d0 > inner.d0:
            inner = extend_inner_dim(inner, d0)
        return FactorPair(adjoint(inner.C), adjoint(inner.B), branch, dict(inner.params),
                          d0=d0, diagonal="B", tensor_order=inner.tensor_order)
    raise ValidationError(f"d0={d0} is below min(d_left, d_right)={min(A.d_left, A.d_right)}")


def factor_chain(A: CoeffTensor, s: float | None, n_factors: int, branch: str = "roumieu",
                 r: float | None = None, jmax: int | None = None) -> FactorChain:
    """Repeatedly factor the left factor: ``A = K_N o ... o K_1``.

    ``r`` is used for the first Roumieu step only; later steps estimate it.
    """
    if n_factors < 2:
        raise ValidationError("n_factors must be >= 2")
    right = []
    diagnostics = []
    left = A
    for step in range(n_factors - 1):
        pair = factorize(left, branch, s=s, r=r if step == 0 else None, jmax=jmax)
        right.append(pair.C)
        left = pair.B
        diagnostics.append(_decay_info(pair.C, s))
    diagnostics.append(_decay_info(left, s))
    factors = [left] + right[::-1]
    diagnostics = diagnostics[::-1]
    return FactorChain(factors, branch, diagnostics)


def _decay_info(T, s):
    if s is None or T.is_zero:
        return {}
    return estimate_decay(T, s).to_dict()


def verify_pair(A: CoeffTensor, pair: FactorPair, s: float | None = None) -> dict:
    """Reconstruction error, positivity of the diagonal factor and decay data."""
    diag = pair.C if pair.diagonal == "C" else adjoint(pair.B)
    ok, _ = is_positive_hermite_diagonal(diag)
    out = {"reconstruction_error": reconstruction_error(A, pair.product()),
           "positive_diagonal": bool(ok)}
    if s is not None:
        out["decay"] = {"A": _decay_info(A, s), "B": _decay_info(pair.B, s),
                        "C": _decay_info(pair.C, s)}
    return out
