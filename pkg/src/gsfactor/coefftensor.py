"""Sparse Hermite coefficient tensors of kernels and their decay analysis.

A kernel ``K(x, y) = sum a[alpha, beta] h_alpha(x) h_beta(y)`` is stored as
a :class:`CoeffTensor`; the operator with kernel ``K`` has matrix ``a`` in
the Hermite basis, so composition of operators is a contraction over the
shared index.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

from .errors import DegenerateFitError, ValidationError
from .hermite import HermiteBasis, MultiIndex, fourier_coeffs, synthesize

__all__ = [
    "CoeffTensor",
    "DecayProfile",
    "SpaceClass",
    "DROP_BELOW",
    "check_bound",
    "estimate_decay",
    "classify",
    "pointwise_decay_check",
    "matmul",
    "adjoint",
    "reconstruction_error",
]

# entries smaller than this are treated as exact zeros
DROP_BELOW = 1e-300


def _norm_trunc(trunc, dim, name):
    if isinstance(trunc, (int, np.integer)):
        trunc = (int(trunc),) * dim
    trunc = tuple(int(t) for t in trunc)
    if len(trunc) != dim:
        raise ValidationError(f"{name} has {len(trunc)} axes, expected {dim}")
    if any(t < 0 for t in trunc):
        raise ValidationError(f"{name} must be non-negative")
    return trunc


class CoeffTensor:
    """Immutable sparse map ``(alpha, beta) -> a[alpha, beta]``.

    Parameters
    ----------
    d_left, d_right : int
        Dimensions of the output variable ``x`` and the input variable ``y``.
    trunc_left, trunc_right : int or sequence of int
        Largest Hermite order per axis (an int applies to every axis).
    entries : mapping, optional
        ``{(alpha, beta): value}``; values below ``DROP_BELOW`` in modulus
        are discarded.
    """

    __slots__ = ("d_left", "d_right", "trunc_left", "trunc_right", "_entries", "_hash")

    def __init__(self, d_left: int, d_right: int, trunc_left, trunc_right,
                 entries: Mapping | Iterable = ()):
        if d_left < 1 or d_right < 1:
            raise ValidationError("dimensions must be >= 1")
        self.d_left = int(d_left)
        self.d_right = int(d_right)
        self.trunc_left = _norm_trunc(trunc_left, self.d_left, "trunc_left")
        self.trunc_right = _norm_trunc(trunc_right, self.d_right, "trunc_right")
        items = entries.items() if isinstance(entries, Mapping) else entries
        store = {}
        for (alpha, beta), value in items:
            alpha, beta = MultiIndex(alpha), MultiIndex(beta)
            self._check_index(alpha, self.d_left, self.trunc_left, "alpha")
            self._check_index(beta, self.d_right, self.trunc_right, "beta")
            value = complex(value)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValidationError(f"non-finite entry at {(alpha, beta)}")
            if abs(value) < DROP_BELOW:
                continue
            store[(tuple(alpha), tuple(beta))] = value
        self._entries = dict(sorted(store.items()))
        self._hash = None

    @staticmethod
    def _check_index(idx, dim, trunc, name):
        if len(idx) != dim:
            raise ValidationError(f"{name}={tuple(idx)} has dimension {len(idx)}, expected {dim}")
        if any(i > t for i, t in zip(idx, trunc)):
            raise ValidationError(f"{name}={tuple(idx)} exceeds truncation {trunc}")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, d_left, d_right, trunc_left, trunc_right):
        return cls(d_left, d_right, trunc_left, trunc_right)

    @classmethod
    def from_dense(cls, mat, d_left=1, d_right=1, trunc_left=None, trunc_right=None):
        """Build from a dense matrix indexed by lexicographic multi-indices."""
        mat = np.asarray(mat)
        if trunc_left is None:
            trunc_left = _cube_trunc(mat.shape[0], d_left)
        if trunc_right is None:
            trunc_right = _cube_trunc(mat.shape[1], d_right)
        trunc_left = _norm_trunc(trunc_left, d_left, "trunc_left")
        trunc_right = _norm_trunc(trunc_right, d_right, "trunc_right")
        rows = _box(trunc_left)
        cols = _box(trunc_right)
        if mat.shape != (len(rows), len(cols)):
            raise ValidationError(f"matrix shape {mat.shape} does not match truncations")
        ii, jj = np.nonzero(np.abs(mat) >= DROP_BELOW)
        entries = {(rows[i], cols[j]): mat[i, j] for i, j in zip(ii, jj)}
        return cls(d_left, d_right, trunc_left, trunc_right, entries)

    # -- accessors --------------------------------------------------------------

    @property
    def entries(self) -> dict:
        return dict(self._entries)

    def items(self):
        return self._entries.items()

    def __len__(self):
        return len(self._entries)

    def __getitem__(self, key):
        alpha, beta = key
        return self._entries.get((tuple(MultiIndex(alpha)), tuple(MultiIndex(beta))), 0j)

    @property
    def is_zero(self) -> bool:
        return not self._entries

    @property
    def shape(self):
        return (_box_size(self.trunc_left), _box_size(self.trunc_right))

    def row_indices(self):
        return _box(self.trunc_left)

    def col_indices(self):
        return _box(self.trunc_right)

    def arrays(self):
        """Return ``(alphas, betas, values)`` as numpy arrays in canonical order."""
        n = len(self._entries)
        alphas = np.zeros((n, self.d_left), dtype=np.int64)
        betas = np.zeros((n, self.d_right), dtype=np.int64)
        vals = np.zeros(n, dtype=complex)
        for k, ((a, b), v) in enumerate(self._entries.items()):
            alphas[k] = a
            betas[k] = b
            vals[k] = v
        return alphas, betas, vals

    def to_sparse(self):
        """CSR matrix over the full truncation boxes (lexicographic order)."""
        alphas, betas, vals = self.arrays()
        rows = _ravel(alphas, self.trunc_left)
        cols = _ravel(betas, self.trunc_right)
        return sparse.csr_matrix((vals, (rows, cols)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def with_entries(self, entries) -> "CoeffTensor":
        return CoeffTensor(self.d_left, self.d_right, self.trunc_left, self.trunc_right, entries)

    def max_abs(self) -> float:
        return max((abs(v) for v in self._entries.values()), default=0.0)

    # -- comparison / serialization ---------------------------------------------

    def _key(self):
        return (self.d_left, self.d_right, self.trunc_left, self.trunc_right,
                tuple(self._entries.items()))

    def __eq__(self, other):
        if not isinstance(other, CoeffTensor):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return (f"CoeffTensor(d_left={self.d_left}, d_right={self.d_right}, "
                f"trunc_left={self.trunc_left}, trunc_right={self.trunc_right}, "
                f"nnz={len(self)})")

    def to_dict(self) -> dict:
        return {
            "d_left": self.d_left,
            "d_right": self.d_right,
            "trunc_left": list(self.trunc_left),
            "trunc_right": list(self.trunc_right),
            "entries": [[list(a), list(b), v.real, v.imag] for (a, b), v in self._entries.items()],
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "CoeffTensor":
        try:
            entries = {}
            for a, b, re, im in obj["entries"]:
                entries[(tuple(a), tuple(b))] = complex(float(re), float(im))
            return cls(obj["d_left"], obj["d_right"], obj["trunc_left"], obj["trunc_right"], entries)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed coefficient tensor: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CoeffTensor":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)


def _cube_trunc(size, dim):
    n = round(size ** (1.0 / dim))
    for cand in (n - 1, n, n + 1):
        if cand >= 1 and cand ** dim == size:
            return cand - 1
    raise ValidationError(f"size {size} is not a {dim}-dimensional cube")


def _box_size(trunc):
    return int(np.prod([t + 1 for t in trunc]))


def _box(trunc):
    return [tuple(i) for i in itertools.product(*(range(t + 1) for t in trunc))]


def _ravel(idx, trunc):
    if idx.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.ravel_multi_index(idx.T, tuple(t + 1 for t in trunc))


def _weight(moduli, s):
    # |alpha|^{1/(2s)} with 0^p = 0
    return np.power(moduli.astype(float), 1.0 / (2.0 * s))


def _check_s(s):
    if not s >= 0.5:
        raise ValidationError(f"Gelfand-Shilov index s must be >= 1/2, got {s}")


def _log_abs_and_weights(A: CoeffTensor, s: float):
    alphas, betas, vals = A.arrays()
    wa = _weight(alphas.sum(axis=1), s)
    wb = _weight(betas.sum(axis=1), s)
    return np.log(np.abs(vals)), wa + wb, alphas, betas


# -- decay estimates --------------------------------------------------------------


@dataclass(frozen=True)
class DecayProfile:
    s: float
    r_hat: float
    bound: float
    n_entries: int

    def to_dict(self):
        r = self.r_hat if math.isfinite(self.r_hat) else "inf"
        return {"s": self.s, "r_hat": r, "bound": self.bound, "n_entries": self.n_entries}


def check_bound(A: CoeffTensor, s: float, r: float) -> float:
    """``sup |a| exp(r (|alpha|^{1/2s} + |beta|^{1/2s}))`` over stored entries.

    Evaluated in log form; returns ``inf`` on overflow and 0 for an empty tensor.
    """
    _check_s(s)
    if A.is_zero:
        return 0.0
    loga, w, _, _ = _log_abs_and_weights(A, s)
    with np.errstate(over="ignore"):
        return float(np.exp(np.max(loga + r * w)))


def estimate_decay(A: CoeffTensor, s: float) -> DecayProfile:
    """Largest rate ``r`` certified by the stored entries.

    ``r_hat = min (log M - log|a|) / (|alpha|^{1/2s} + |beta|^{1/2s})`` over
    entries other than ``(0, 0)``, with ``M = max |a|``; hence
    ``|a| <= M exp(-r_hat (...))`` for every stored entry.
    """
    _check_s(s)
    if A.is_zero:
        raise ValidationError("cannot estimate decay of the zero tensor")
    loga, w, _, _ = _log_abs_and_weights(A, s)
    logm = float(np.max(loga))
    mask = w > 0
    if not mask.any():
        r_hat = math.inf
    else:
        r_hat = max(0.0, float(np.min((logm - loga[mask]) / w[mask])))
    bound = math.exp(logm) if math.isinf(r_hat) else check_bound(A, s, r_hat)
    return DecayProfile(s=float(s), r_hat=r_hat, bound=bound, n_entries=len(A))


# -- classification ---------------------------------------------------------------


@dataclass(frozen=True)
class SpaceClass:
    """Outcome of :func:`classify`.

    ``kind`` is one of ``"schwartz"``, ``"roumieu"``, ``"beurling"``, ``"dual"``
    or ``"indeterminate"``; ``params`` carries the fitted order ``t`` and/or
    rate ``r_hat``; ``diagnostics`` are free-form numbers.
    """

    kind: str
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self):
        return {"kind": self.kind, "params": self.params, "reason": self.reason,
                "diagnostics": _jsonable(self.diagnostics)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


BEURLING_PROBES = (1.0, 2.0, 4.0, 8.0)
ROUMIEU_TOL = 1e-8
# relative growth of a bound between nested truncations regarded as stable
STABLE_GROWTH = 0.05
# fitted polynomial orders below this are round-off of a flat envelope
POLY_TOL = 1e-6


def _restrict(A: CoeffTensor, n: int) -> CoeffTensor:
    tl = tuple(min(t, n) for t in A.trunc_left)
    tr = tuple(min(t, n) for t in A.trunc_right)
    keep = {k: v for k, v in A.items()
            if max(k[0]) <= n and max(k[1]) <= n}
    return CoeffTensor(A.d_left, A.d_right, tl, tr, keep)


def _bracket(x):
    return np.sqrt(1.0 + x.astype(float) ** 2)


def _poly_slope(A: CoeffTensor, monotone: bool = True):
    """Envelope slope of log|a| against log <(|alpha|, |beta|)>.

    With ``monotone`` the envelope is the largest value at or beyond each
    shell (a decay envelope); otherwise the per-shell maxima are fitted.
    """
    alphas, betas, vals = A.arrays()
    mod = np.hypot(alphas.sum(axis=1), betas.sum(axis=1))
    x = np.log(_bracket(mod))
    y = np.log(np.abs(vals))
    # envelope: largest |a| in each shell of the joint modulus
    shells = {}
    for xi, yi in zip(x, y):
        shells[xi] = max(yi, shells.get(xi, -np.inf))
    xs = np.array(sorted(shells))
    ys = np.array([shells[k] for k in xs])
    if monotone:
        ys = np.maximum.accumulate(ys[::-1])[::-1]
    if xs.size < 3:
        return float("nan"), xs.size
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope), xs.size


def classify(A: CoeffTensor, s: float, mode: str = "roumieu") -> SpaceClass:
    """Heuristic membership test on a finite truncation.

    Membership cannot be decided from finitely many coefficients, so the
    result is a tagged estimate with diagnostics:

    ``roumieu``
        ``estimate_decay`` rate strictly positive.
    ``beurling``
        for each probe rate the bound at full truncation ``N`` exceeds the
        bound at ``N // 2`` by less than 5 %.
    ``schwartz``
        fitted polynomial decay order ``t`` of the coefficient envelope,
        growing across nested truncations.
    ``dual``
        the coefficients grow at most polynomially (fitted ``t`` finite).
    """
    if mode not in ("schwartz", "roumieu", "beurling", "dual"):
        raise ValidationError(f"unknown mode {mode!r}")
    _check_s(s)
    if A.is_zero:
        return SpaceClass("indeterminate", reason="empty")
    trunc = min(A.trunc_left + A.trunc_right)
    if trunc < 8:
        return SpaceClass("indeterminate", reason=f"truncation {trunc} < 8")

    prof = estimate_decay(A, s)
    half = _restrict(A, trunc // 2)
    quarter = _restrict(A, trunc // 4)
    diag = {"r_hat": prof.r_hat, "truncation": trunc}
    if not half.is_zero:
        diag["r_hat_half"] = estimate_decay(half, s).r_hat

    if mode == "roumieu":
        if prof.r_hat > ROUMIEU_TOL:
            return SpaceClass("roumieu", {"s": float(s), "r_hat": prof.r_hat}, diag)
        return SpaceClass("indeterminate", {"s": float(s)}, diag,
                          reason="no positive decay rate")

    if mode == "beurling":
        growth = {}
        stable = True
        for r in BEURLING_PROBES:
            full = check_bound(A, s, r)
            part = check_bound(half, s, r) if not half.is_zero else 0.0
            g = math.inf if part == 0.0 else full / part - 1.0
            growth[r] = g
            stable &= bool(math.isfinite(full) and g < STABLE_GROWTH)
        diag["bound_growth"] = growth
        if stable:
            return SpaceClass("beurling", {"s": float(s)}, diag)
        return SpaceClass("indeterminate", {"s": float(s)}, diag,
                          reason="bound grows across nested truncations")

    mono = mode == "schwartz"
    slope_full, npts = _poly_slope(A, mono)
    slope_half = _poly_slope(half, mono)[0] if len(half) else float("nan")
    slope_quarter = _poly_slope(quarter, mono)[0] if len(quarter) else float("nan")
    diag.update({"slope": slope_full, "slope_half": slope_half,
                 "slope_quarter": slope_quarter, "shells": npts})
    if not math.isfinite(slope_full):
        return SpaceClass("indeterminate", {}, diag, reason="unstable polynomial fit")

    if mode == "schwartz":
        t = -slope_full
        if t > POLY_TOL and (not math.isfinite(slope_half) or -slope_half <= t * (1 + STABLE_GROWTH)):
            return SpaceClass("schwartz", {"t": t}, diag)
        return SpaceClass("indeterminate", {"t": t}, diag,
                          reason="no polynomial decay" if t <= POLY_TOL else "decay order unstable")

    # dual: the sequence is allowed to grow; report the growth order and rate
    t = -slope_full
    diag["r_dual"] = prof.r_hat
    return SpaceClass("dual", {"t": t, "r_hat": prof.r_hat}, diag)


# -- pointwise decay -------------------------------------------------------------


def _fit_envelope(x, values, s):
    mag = np.abs(values)
    ok = mag > 1e-300
    if ok.sum() < 3:
        raise DegenerateFitError("fewer than 3 samples above 1e-300")
    ax = np.abs(x[ok])
    order = np.argsort(ax)
    ax = ax[order]
    # monotone envelope: largest |f| at or beyond each radius
    env = np.maximum.accumulate(mag[ok][order][::-1])[::-1]
    feat = ax ** (1.0 / s)
    if np.ptp(feat) == 0:
        raise DegenerateFitError("samples do not span distinct radii")
    slope, _ = np.polyfit(feat, np.log(env), 1)
    eps = -float(slope)
    c = float(np.max(mag * np.exp(eps * np.abs(x) ** (1.0 / s))))
    return eps, c


def pointwise_decay_check(c: np.ndarray, s: float, grid=None):
    """Fit ``|f(x)| <= C exp(-eps |x|^{1/s})`` for ``f`` and its Fourier transform.

    ``c`` are 1-D Hermite coefficients. Returns
    ``{"f": (eps, C), "fourier": (eps, C)}``; ``C`` is the smallest constant
    making the bound hold on the grid for the fitted ``eps``. Diagnostic only.
    """
    _check_s(s)
    c = np.asarray(c)
    if c.ndim != 1:
        raise ValidationError("pointwise_decay_check expects 1-D coefficients")
    basis = HermiteBasis(1, c.size - 1)
    if grid is None:
        lim = math.sqrt(2.0 * c.size)
        grid = np.linspace(-lim, lim, 201)
    grid = np.asarray(grid, dtype=float)
    out = {}
    for name, coeffs in (("f", c), ("fourier", fourier_coeffs(c))):
        out[name] = _fit_envelope(grid, synthesize(coeffs, basis, grid), s)
    return out


# -- algebra -----------------------------------------------------------------------


def matmul(A2: CoeffTensor, A1: CoeffTensor) -> CoeffTensor:
    """Coefficients of the composition ``T_{A2} o T_{A1}``."""
    if A2.d_right != A1.d_left or A2.trunc_right != A1.trunc_left:
        raise ValidationError(
            f"cannot compose: inner index {A2.d_right}/{A2.trunc_right} vs "
            f"{A1.d_left}/{A1.trunc_left}")
    prod = (A2.to_sparse() @ A1.to_sparse()).tocoo()
    rows = np.unravel_index(prod.row, tuple(t + 1 for t in A2.trunc_left))
    cols = np.unravel_index(prod.col, tuple(t + 1 for t in A1.trunc_right))
    entries = {}
    for k in range(prod.nnz):
        alpha = tuple(int(r[k]) for r in rows)
        beta = tuple(int(q[k]) for q in cols)
        entries[(alpha, beta)] = prod.data[k]
    return CoeffTensor(A2.d_left, A1.d_right, A2.trunc_left, A1.trunc_right, entries)


def adjoint(A: CoeffTensor) -> CoeffTensor:
    """Coefficients of the adjoint operator: ``conj(a[beta, alpha])``."""
    entries = {(b, a): v.conjugate() for (a, b), v in A.items()}
    return CoeffTensor(A.d_right, A.d_left, A.trunc_right, A.trunc_left, entries)


def reconstruction_error(A: CoeffTensor, P: CoeffTensor) -> float:
    """Largest entrywise relative deviation of ``P`` from ``A``.

    On the support of ``A`` the error is ``|p - a| / |a|``; entries of ``P``
    outside that support count as ``|p| / max|a|``.
    """
    if (A.d_left, A.d_right, A.trunc_left, A.trunc_right) != (
            P.d_left, P.d_right, P.trunc_left, P.trunc_right):
        raise ValidationError("tensors have different layouts")
    scale = A.max_abs()
    err = 0.0
    for key, a in A.items():
        p = P._entries.get(key, 0j)
        err = max(err, abs(p - a) / abs(a))
    for key, p in P.items():
        if key not in A._entries:
            err = max(err, abs(p) / scale if scale > 0 else math.inf)
    return err
