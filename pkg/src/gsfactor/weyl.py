"""Grid-based Op_t calculus in one dimension (symbols on R^2).

For ``t`` in R the operator with symbol ``a(x, xi)`` has kernel

    K(x, y) = (2 pi)^{-1} int a((1 - t) x + t y, xi) e^{i (x - y) xi} d xi.

Writing ``G(u, v) = (2 pi)^{-1} int a(u, xi) e^{i v xi} d xi`` gives
``K(x, y) = G(x - t v, v)`` with ``v = x - y``. On a uniform grid the
differences ``v`` are multiples of the spacing, so along each diagonal of
``K`` the first argument of ``G`` is the grid shifted by ``-t v``: the shear
reduces to one exact trigonometric shift per diagonal (FFT phase factor on
zero-padded data). The ``xi`` integral is the trapezoid rule, which is
spectrally accurate for data that decays inside the window.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .coefftensor import CoeffTensor
from .errors import ValidationError, WindowError
from .factorize import factorize
from .hermite import hermite_table

__all__ = [
    "Axis",
    "PhaseGrid",
    "GridSymbol",
    "GridKernel",
    "WINDOW_TOL",
    "check_window",
    "symbol_to_kernel",
    "kernel_to_symbol",
    "change_quantization",
    "sharp",
    "compose_kernels",
    "factorize_symbol",
    "kernel_grid_to_coeffs",
    "coeffs_to_kernel_grid",
]

# values on the two outermost rings must be below this
WINDOW_TOL = 1e-10


@dataclass(frozen=True)
class Axis:
    """``n`` points ``min + k h``, ``h = (max - min) / n`` (periodic layout)."""

    min: float
    max: float
    n: int

    def __post_init__(self):
        if not self.max > self.min:
            raise ValidationError("axis needs max > min")
        if self.n < 16 or self.n % 2:
            raise ValidationError(f"axis size must be even and >= 16, got {self.n}")

    @property
    def step(self) -> float:
        return (self.max - self.min) / self.n

    def points(self) -> np.ndarray:
        return self.min + self.step * np.arange(self.n)

    def to_dict(self):
        return {"min": self.min, "max": self.max, "n": self.n}

    @classmethod
    def parse(cls, text: str) -> "Axis":
        try:
            lo, hi, n = text.split(",")
            return cls(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise ValidationError(f"bad grid spec {text!r}; expected 'min,max,n'") from exc


@dataclass(frozen=True)
class PhaseGrid:
    """Two axes: ``(x, xi)`` for symbols or ``(x, y)`` for kernels."""

    axis1: Axis
    axis2: Axis

    @classmethod
    def square(cls, lo=-8.0, hi=8.0, n=256):
        ax = Axis(float(lo), float(hi), int(n))
        return cls(ax, ax)

    @property
    def shape(self):
        return (self.axis1.n, self.axis2.n)

    def mesh(self):
        return np.meshgrid(self.axis1.points(), self.axis2.points(), indexing="ij")


@dataclass(frozen=True, eq=False)
class _GridData:
    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValidationError(f"values have shape {vals.shape}, grid is {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    def to_dict(self):
        # axis1 varies fastest in the flat list
        flat = self.values.ravel(order="F")
        return {"axis1": self.grid.axis1.to_dict(), "axis2": self.grid.axis2.to_dict(),
                "values": [[v.real, v.imag] for v in flat.tolist()]}

    @classmethod
    def from_dict(cls, obj):
        try:
            grid = PhaseGrid(Axis(**obj["axis1"]), Axis(**obj["axis2"]))
            flat = np.array([complex(re, im) for re, im in obj["values"]])
            values = flat.reshape(grid.shape, order="F")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed grid data: {exc}") from exc
        return cls(grid, values)

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


class GridSymbol(_GridData):
    """Symbol ``a(x_i, xi_m)`` stored as ``values[i, m]``."""


class GridKernel(_GridData):
    """Kernel ``K(x_i, y_j)`` stored as ``values[i, j]``."""


def check_window(data: _GridData, tol: float = WINDOW_TOL) -> float:
    """Largest modulus on the two outermost rings; raises :class:`WindowError` above ``tol``."""
    v = np.abs(data.values)
    ring = max(v[:2].max(), v[-2:].max(), v[:, :2].max(), v[:, -2:].max())
    if ring > tol:
        raise WindowError(f"data not window-adequate: boundary value {ring:.3e} > {tol:.0e}")
    return float(ring)


def _shift(cols: np.ndarray, step: float, shifts: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation ``g(u + s_d)`` for each column ``d``.

    The columns are zero-padded to twice their length so that shifted
    samples do not wrap data from the opposite edge.
    """
    n = cols.shape[0]
    spec = np.fft.fft(cols, n=2 * n, axis=0)
    k = 2.0 * np.pi * np.fft.fftfreq(2 * n, d=step)
    spec *= np.exp(1j * np.outer(k, shifts))
    return np.fft.ifft(spec, axis=0)[:n]


def _diag_offsets(n):
    return np.arange(-(n - 1), n)


def symbol_to_kernel(a: GridSymbol, t: float, check: bool = True) -> GridKernel:
    """Kernel of ``Op_t(a)`` on the grid ``(x, x)``."""
    if check:
        check_window(a)
    xa, xia = a.grid.axis1, a.grid.axis2
    n, h = xa.n, xa.step
    d = _diag_offsets(n)
    v = d * h
    xi = xia.points()
    # G(u_k, v_d) by the trapezoid rule in xi
    G = (xia.step / (2.0 * np.pi)) * (a.values @ np.exp(1j * np.outer(xi, v)))
    # along diagonal d the kernel needs G(x_i - t v_d, v_d)
    Gs = _shift(G, h, -t * v)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    K = Gs[i, (i - j) + (n - 1)]
    return GridKernel(PhaseGrid(xa, xa), K)


def kernel_to_symbol(K: GridKernel, t: float, xi_axis: Axis | None = None,
                     check: bool = True) -> GridSymbol:
    """Op_t symbol of the operator with kernel ``K`` (inverse of :func:`symbol_to_kernel`)."""
    if check:
        check_window(K)
    xa, ya = K.grid.axis1, K.grid.axis2
    if (xa.n, xa.step) != (ya.n, ya.step):
        raise ValidationError("kernel grid needs equal x and y spacing")
    if xi_axis is None:
        xi_axis = Axis(xa.min, xa.max, xa.n)
    n, h = xa.n, xa.step
    d = _diag_offsets(n)
    v = d * h
    # column d holds K(x_i, x_i - v_d) = G(x_i - t v_d, v_d); zero outside the grid
    i = np.arange(n)[:, None]
    j = i - d[None, :]
    valid = (j >= 0) & (j < n)
    Gd = np.where(valid, K.values[i, np.clip(j, 0, n - 1)], 0.0)
    G = _shift(Gd, h, t * v)
    xi = xi_axis.points()
    a = h * (G @ np.exp(-1j * np.outer(v, xi)))
    return GridSymbol(PhaseGrid(xa, xi_axis), a)


def change_quantization(a: GridSymbol, s: float, t: float, check: bool = True) -> GridSymbol:
    """Symbol ``b`` with ``Op_t(b) = Op_s(a)``.

    On the Fourier side (frequencies ``eta`` for ``x``, ``zeta`` for ``xi``)
    this is multiplication by ``exp(i (s - t) eta zeta)``. The multiplier is
    translation invariant, so the grid origin drops out; data are
    zero-padded to twice the size before the FFT.
    """
    if check:
        check_window(a)
    if s == t:
        return GridSymbol(a.grid, a.values.copy())
    n1, n2 = a.grid.shape
    spec = np.fft.fft2(a.values, s=(2 * n1, 2 * n2))
    eta = 2.0 * np.pi * np.fft.fftfreq(2 * n1, d=a.grid.axis1.step)
    zeta = 2.0 * np.pi * np.fft.fftfreq(2 * n2, d=a.grid.axis2.step)
    spec *= np.exp(1j * (s - t) * np.outer(eta, zeta))
    return GridSymbol(a.grid, np.fft.ifft2(spec)[:n1, :n2])


def compose_kernels(Ka: GridKernel, Kb: GridKernel) -> GridKernel:
    """Kernel of the composition: ``int Ka(x, z) Kb(z, y) dz`` by the trapezoid rule."""
    if Ka.grid != Kb.grid:
        raise ValidationError("kernels live on different grids")
    h = Ka.grid.axis2.step
    return GridKernel(Ka.grid, h * (Ka.values @ Kb.values))


def sharp(a: GridSymbol, b: GridSymbol, t: float, check: bool = True) -> GridSymbol:
    """Symbol of ``Op_t(a) o Op_t(b)`` via the kernel route."""
    if a.grid != b.grid:
        raise ValidationError("symbols live on different grids")
    Ka = symbol_to_kernel(a, t, check=check)
    Kb = symbol_to_kernel(b, t, check=check)
    return kernel_to_symbol(compose_kernels(Ka, Kb), t, xi_axis=a.grid.axis2, check=check)


# -- Hermite bridge -----------------------------------------------------------------


def kernel_grid_to_coeffs(K: GridKernel, trunc: int = 32, rtol: float = 1e-15) -> CoeffTensor:
    """Hermite coefficients ``a[m, n] = (K, h_m (x) h_n)`` by the grid trapezoid rule.

    Coefficients below ``rtol * max|a|`` are discarded as quadrature noise.
    """
    xa, ya = K.grid.axis1, K.grid.axis2
    Hx = hermite_table(trunc, xa.points())
    Hy = hermite_table(trunc, ya.points())
    coeffs = (xa.step * ya.step) * (Hx @ K.values @ Hy.T)
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    coeffs = np.where(np.abs(coeffs) >= rtol * scale, coeffs, 0.0)
    return CoeffTensor.from_dense(coeffs, 1, 1, trunc, trunc)


def coeffs_to_kernel_grid(A: CoeffTensor, grid: PhaseGrid) -> GridKernel:
    """Evaluate ``sum a[m, n] h_m(x) h_n(y)`` on the grid (d = 1 tensors only)."""
    if A.d_left != 1 or A.d_right != 1:
        raise ValidationError("grid kernels are one-dimensional in each variable")
    Hx = hermite_table(A.trunc_left[0], grid.axis1.points())
    Hy = hermite_table(A.trunc_right[0], grid.axis2.points())
    return GridKernel(grid, Hx.T @ A.to_dense() @ Hy)


def factorize_symbol(a: GridSymbol, t: float, s: float | None, branch: str = "roumieu",
                     trunc: int = 32, r: float | None = None):
    """Symbols ``(a1, a2)`` with ``a1 #_t a2 = a``.

    Route: kernel, Hermite coefficients, :func:`factorize`, then each factor
    back to a grid kernel and to its Op_t symbol.
    """
    K = symbol_to_kernel(a, t)
    A = kernel_grid_to_coeffs(K, trunc)
    pair = factorize(A, branch, s=s, r=r)
    grid = K.grid
    a1 = kernel_to_symbol(coeffs_to_kernel_grid(pair.B, grid), t, xi_axis=a.grid.axis2)
    a2 = kernel_to_symbol(coeffs_to_kernel_grid(pair.C, grid), t, xi_axis=a.grid.axis2)
    return a1, a2
