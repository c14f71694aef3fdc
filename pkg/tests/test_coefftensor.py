import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsfactor.coefftensor import (CoeffTensor, adjoint, check_bound, classify, estimate_decay,
                                  matmul, pointwise_decay_check, reconstruction_error)
from gsfactor.errors import DegenerateFitError, ValidationError
from gsfactor.generators import mehler, random_gs, rank_one

# -- strategies ---------------------------------------------------------------

cplx = st.complex_numbers(max_magnitude=1e3, min_magnitude=1e-3, allow_nan=False, allow_infinity=False)


@st.composite
def tensors(draw, n=None, d_left=None, d_right=None):
    dl = d_left or draw(st.integers(1, 2))
    dr = d_right or draw(st.integers(1, 2))
    n = n if n is not None else draw(st.integers(0, 4))
    rows = list(itertools.product(range(n + 1), repeat=dl))
    cols = list(itertools.product(range(n + 1), repeat=dr))
    keys = draw(st.lists(st.tuples(st.sampled_from(rows), st.sampled_from(cols)), max_size=12, unique=True))
    return CoeffTensor(dl, dr, n, n, {k: draw(cplx) for k in keys})


# -- container ------------------------------------------------------------------


def test_construction_validates():
    with pytest.raises(ValidationError):
        CoeffTensor(1, 1, 3, 3, {((4,), (0,)): 1.0})
    with pytest.raises(ValidationError):
        CoeffTensor(1, 1, 3, 3, {((0, 0), (0,)): 1.0})
    with pytest.raises(ValidationError):
        CoeffTensor(1, 1, 3, 3, {((0,), (0,)): float("inf")})
    A = CoeffTensor(1, 1, 3, 3, {((1,), (0,)): 0.0, ((0,), (2,)): 2.0})
    assert len(A) == 1 and A[(0,), (2,)] == 2.0 and A[(1,), (0,)] == 0


def test_dense_round_trip():
    mat = np.arange(16.0).reshape(4, 4) * (1 + 1j)
    A = CoeffTensor.from_dense(mat, 2, 2)
    assert A.trunc_left == (1, 1) and np.array_equal(A.to_dense(), mat)
    assert A.row_indices()[1] == (0, 1)


@given(tensors())
def test_json_round_trip_bit_exact(A):
    text = A.to_json()
    B = CoeffTensor.from_json(text)
    assert B == A and B.to_json() == text
    obj = json.loads(text)
    assert set(obj) == {"d_left", "d_right", "trunc_left", "trunc_right", "entries"}
    keys = [(tuple(e[0]), tuple(e[1])) for e in obj["entries"]]
    assert keys == sorted(keys)


def test_malformed_json():
    with pytest.raises(ValidationError):
        CoeffTensor.from_json("{")
    with pytest.raises(ValidationError):
        CoeffTensor.from_json('{"d_left": 1}')


# -- decay ----------------------------------------------------------------------


def test_check_bound_examples():
    one = rank_one((0,), (0,), trunc=4)
    assert check_bound(one, 0.5, 7.0) == 1.0
    assert check_bound(CoeffTensor.zeros(1, 1, 3, 3), 0.5, 1.0) == 0.0
    assert check_bound(mehler(0.5, 64), 0.5, 0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)
    with pytest.raises(ValidationError):
        check_bound(one, 0.4, 1.0)


def test_estimate_decay_examples():
    assert estimate_decay(rank_one((0,), (0,), 3), 0.5).r_hat == math.inf
    assert estimate_decay(mehler(0.5, 64), 0.5).r_hat == pytest.approx(0.5, abs=1e-12)
    A = CoeffTensor(1, 1, 2, 2, {((0,), (0,)): 1.0, ((1,), (0,)): math.exp(-2)})
    assert estimate_decay(A, 0.5).r_hat == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(ValidationError):
        estimate_decay(CoeffTensor.zeros(1, 1, 2, 2), 0.5)


@given(tensors(), st.sampled_from([0.5, 0.75, 1.0, 2.0]), st.floats(0, 3), st.floats(0, 3))
def test_check_bound_monotone(A, s, r1, r2):
    lo, hi = sorted((r1, r2))
    assert check_bound(A, s, lo) <= check_bound(A, s, hi)
    assert check_bound(A, s, 0.0) == pytest.approx(A.max_abs(), rel=1e-14)


@given(tensors(), st.sampled_from([0.5, 1.0, 1.5]))
def test_estimate_decay_guarantee(A, s):
    if A.is_zero:
        return
    prof = estimate_decay(A, s)
    M = A.max_abs()
    assert prof.r_hat >= 0
    if math.isinf(prof.r_hat):
        return
    p = 1 / (2 * s)
    for (a, b), v in A.items():
        w = sum(a) ** p + sum(b) ** p
        assert abs(v) <= M * math.exp(-prof.r_hat * w) * (1 + 1e-12)


def test_classify_examples():
    c = classify(mehler(0.5, 64), 0.5, "roumieu")
    assert c.kind == "roumieu" and c.params["r_hat"] == pytest.approx(0.5, abs=1e-6)
    z = classify(CoeffTensor.zeros(1, 1, 16, 16), 0.5)
    assert z.kind == "indeterminate" and z.reason == "empty"
    assert classify(mehler(0.5, 4), 0.5).kind == "indeterminate"
    g = CoeffTensor(1, 1, 32, 32, {((a,), (b,)): math.exp(-(a + b) ** 2)
                                  for a in range(33) for b in range(33) if (a + b) ** 2 < 690})
    assert classify(g, 0.5, "beurling").kind == "beurling"
    # Mehler decays only at rate tau: bounds for r > tau grow with the truncation
    assert classify(mehler(0.5, 64), 0.5, "beurling").kind == "indeterminate"
    with pytest.raises(ValidationError):
        classify(g, 0.5, "bogus")


def test_classify_beurling_oracle():
    # direct bound evaluation at nested truncations
    def gauss(N):
        return CoeffTensor(1, 1, N, N, {((a,), (b,)): math.exp(-(a + b) ** 2)
                                        for a in range(N + 1) for b in range(N + 1)
                                        if (a + b) ** 2 < 690})
    for r in (1, 2, 4, 8):
        b8, b16, b32 = (check_bound(gauss(N), 0.5, r) for N in (8, 16, 32))
        assert b8 == b16 == b32


def test_classify_schwartz_and_dual():
    poly = CoeffTensor.from_dense(np.array([[(1.0 + n + m) ** -6 for m in range(33)] for n in range(33)]))
    c = classify(poly, 0.5, "schwartz")
    assert c.kind == "schwartz" and 4 < c.params["t"] < 8
    grow = CoeffTensor.from_dense(np.array([[(1.0 + n + m) ** 2 for m in range(17)] for n in range(17)]))
    d = classify(grow, 0.5, "dual")
    assert d.kind == "dual" and d.params["t"] < 0
    assert classify(grow, 0.5, "schwartz").kind == "indeterminate"


def test_pointwise_decay():
    e0 = np.zeros(17)
    e0[0] = 1
    out = pointwise_decay_check(e0, 0.5)
    assert out["f"][0] == pytest.approx(0.5, abs=1e-6)
    assert out["f"][1] == pytest.approx(math.pi ** -0.25, rel=1e-6)
    assert out["fourier"] == out["f"]
    with pytest.raises(DegenerateFitError):
        pointwise_decay_check(np.zeros(5), 0.5)


# -- algebra ------------------------------------------------------------------------


def test_matmul_examples():
    A = random_gs(5, seed=1)
    eye = CoeffTensor(1, 1, 5, 5, {((k,), (k,)): 1.0 for k in range(6)})
    assert matmul(eye, A) == A
    assert matmul(A, CoeffTensor.zeros(1, 1, 5, 5)).is_zero
    with pytest.raises(ValidationError):
        matmul(A, random_gs(4, seed=1))


def test_matmul_rank_one_oracle():
    rng = np.random.default_rng(7)
    u, v, p, q = (rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(4))
    X = CoeffTensor.from_dense(np.outer(u, v.conj()))
    Y = CoeffTensor.from_dense(np.outer(p, q.conj()))
    expected = np.zeros((4, 4), complex)
    for a in range(4):
        for b in range(4):
            expected[a, b] = sum(u[a] * v[g].conj() * p[g] * q[b].conj() for g in range(4))
    assert np.allclose(matmul(X, Y).to_dense(), expected, rtol=1e-13, atol=0)
    assert np.allclose(expected, np.vdot(v, p) * np.outer(u, q.conj()), rtol=1e-13, atol=0)


def test_adjoint_examples():
    A = random_gs(4, seed=3, d_left=2)
    assert adjoint(adjoint(A)) == A
    M = mehler(0.5, 10)
    assert adjoint(M) == M
    R = random_gs(4, seed=5)
    s1 = np.linalg.svd(R.to_dense(), compute_uv=False)
    s2 = np.linalg.svd(adjoint(R).to_dense(), compute_uv=False)
    assert np.allclose(s1, s2, rtol=1e-13, atol=1e-300)


@given(st.integers(0, 2**32 - 1))
def test_matmul_associative_and_adjoint_reverses(seed):
    A, B, C = (random_gs(4, seed=seed + k) for k in range(3))
    left = matmul(matmul(A, B), C)
    right = matmul(A, matmul(B, C))
    assert reconstruction_error(left, right) <= 1e-13 or \
        np.max(np.abs(left.to_dense() - right.to_dense())) <= 1e-13 * left.max_abs()
    lhs = adjoint(matmul(A, B)).to_dense()
    rhs = matmul(adjoint(B), adjoint(A)).to_dense()
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * np.max(np.abs(lhs))


def test_reconstruction_error():
    A = CoeffTensor(1, 1, 2, 2, {((0,), (0,)): 2.0})
    P = CoeffTensor(1, 1, 2, 2, {((0,), (0,)): 2.2, ((1,), (1,)): 0.1})
    assert reconstruction_error(A, P) == pytest.approx(0.1)
    with pytest.raises(ValidationError):
        reconstruction_error(A, mehler(1.0, 3))
