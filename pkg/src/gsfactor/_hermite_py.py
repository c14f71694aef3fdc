"""Pure numpy kernels for normalized Hermite functions.

These are the reference implementations; ``_hermite_ext`` provides the same
functions compiled with Cython.
"""
import numpy as np

PI_M14 = np.pi ** -0.25
# beyond this |x| the Gaussian factor is carried in log form
SCALED_CUTOFF = 20.0
_RESCALE = 1e150


def _table_direct(n_max, x):
    out = np.empty((n_max + 1, x.size))
    out[0] = PI_M14 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = (np.sqrt(2.0 / (n + 1)) * x * out[n]
                      - np.sqrt(n / (n + 1.0)) * out[n - 1])
    return out


def _table_scaled(n_max, x):
    # recurrence on h_n * exp(x^2/2) with a running log-scale per point
    out = np.empty((n_max + 1, x.size))
    logscale = -0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.full_like(x, PI_M14)
    out[0] = cur * np.exp(logscale)
    for n in range(n_max):
        nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1.0)) * prev
        big = np.abs(nxt) > _RESCALE
        if big.any():
            f = np.where(big, np.abs(nxt), 1.0)
            nxt = nxt / f
            cur = cur / f
            logscale = logscale + np.log(f)
        prev, cur = cur, nxt
        with np.errstate(under="ignore", divide="ignore"):
            mag = np.log(np.abs(cur)) + logscale
            out[n + 1] = np.sign(cur) * np.exp(mag)
    return out


def hermite_table(n_max, x):
    """Values ``h_n(x_i)`` for ``n = 0..n_max``; shape ``(n_max + 1, len(x))``."""
    x = np.ascontiguousarray(x, dtype=float).ravel()
    out = np.empty((n_max + 1, x.size))
    scaled = np.abs(x) > SCALED_CUTOFF
    if (~scaled).any():
        out[:, ~scaled] = _table_direct(n_max, x[~scaled])
    if scaled.any():
        out[:, scaled] = _table_scaled(n_max, x[scaled])
    return out


def inv_christoffel(n, x):
    """Gauss-Hermite weights ``1 / sum_{k<n} p_k(x)^2`` at the nodes ``x``.

    ``p_k = h_k exp(x^2/2)`` are the orthonormal polynomials for ``exp(-x^2)``.
    """
    x = np.ascontiguousarray(x, dtype=float).ravel()
    tab = _table_scaled_unit(n - 1, x)
    return 1.0 / np.sum(tab * tab, axis=0)


def _table_scaled_unit(n_max, x):
    # h_n(x) * exp(x^2/2), no rescaling: fine for Gauss-Hermite nodes
    out = np.empty((n_max + 1, x.size))
    out[0] = PI_M14
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = (np.sqrt(2.0 / (n + 1)) * x * out[n]
                      - np.sqrt(n / (n + 1.0)) * out[n - 1])
    return out
