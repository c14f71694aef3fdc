import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsfactor.coefftensor import CoeffTensor, adjoint, check_bound, matmul, reconstruction_error
from gsfactor.errors import NumericalError, ValidationError
from gsfactor.factorize import (FactorPair, extend_inner_dim, factor_chain, factorize,
                                factorize_beurling, factorize_roumieu, factorize_schwartz,
                                is_positive_hermite_diagonal, theta_partition, verify_pair)
from gsfactor.generators import mehler, random_gs, rank_one


def gauss_diag(N):
    return CoeffTensor(1, 1, N, N, {((n,), (n,)): math.exp(-n * n) for n in range(N + 1)})


def poly_dense(N, power=20):
    return CoeffTensor.from_dense(np.array([[(1.0 + n + m) ** -power for m in range(N + 1)]
                                            for n in range(N + 1)]))


def check_partition_laws(A, part):
    cols = A.col_indices()
    assert set(part.blocks) == set(cols)
    # every column sits in exactly one block (a dict cannot repeat keys)
    for b, j in part.blocks.items():
        if j == 1:
            assert sum(b) <= part.theta[1] + 1
        elif j <= part.jmax:
            assert sum(b) <= part.theta[j] + j
            # and outside every earlier block
            assert all(sum(b) > part.theta[k] + k for k in range(1, j))


# -- Roumieu ------------------------------------------------------------------------


def test_roumieu_origin():
    A = rank_one((0,), (0,), trunc=3)
    p = factorize_roumieu(A, 0.5, 2.0)
    assert p.B == A
    assert p.C[(0,), (0,)] == 1.0
    assert reconstruction_error(A, p.product()) == 0.0


def test_roumieu_mehler():
    A = mehler(0.5, 64)
    p = factorize_roumieu(A, 0.5, 0.5)
    assert np.max(np.abs(p.product().to_dense() - A.to_dense())) <= 1e-14
    assert check_bound(p.B, 0.5, 0.25) <= math.exp(-0.5)
    for n in range(65):
        assert p.B[(n,), (n,)] == pytest.approx(math.exp(-(2 * n + 1) * 0.5 + 0.25 * n), rel=1e-14)
        assert p.C[(n,), (n,)] == pytest.approx(math.exp(-0.25 * n), rel=1e-14)


def test_roumieu_random_sparse():
    A = random_gs(32, seed=11, n_entries=50)
    # the largest entry is off the origin, so the min-ratio rate is 0 and the
    # default falls back to r = 1; an explicit r = 0 is rejected
    from gsfactor.coefftensor import estimate_decay
    assert estimate_decay(A, 0.5).r_hat == 0.0
    p = factorize_roumieu(A, 0.5)
    assert p.params["r_source"] == "fallback" and p.params["r"] == 1.0
    assert reconstruction_error(A, p.product()) <= 1e-12
    dense = random_gs(32, seed=11)
    q = factorize_roumieu(dense, 0.5)
    assert q.params["r_source"] == "estimate"
    assert reconstruction_error(dense, q.product()) <= 1e-12


def test_roumieu_rejects():
    A = mehler(0.5, 4)
    with pytest.raises(ValidationError):
        factorize_roumieu(A, 0.5, 0.0)
    with pytest.raises(ValidationError):
        factorize_roumieu(A, 0.3, 1.0)
    # weights beyond exp(690) would overflow
    with pytest.raises(NumericalError):
        factorize_roumieu(mehler(0.5, 64), 0.5, 50.0)


@given(st.integers(0, 2**31), st.sampled_from([0.5, 0.75, 1.0]))
def test_roumieu_decay_transfer_B(seed, s):
    A = random_gs(12, seed=seed, s=s, r=1.0)
    r = 1.0
    p = factorize_roumieu(A, s, r)
    assert check_bound(p.B, s, r / 2) <= check_bound(A, s, r) * (1 + 1e-12)


@pytest.mark.parametrize("r", [0.25, 0.5, 1.0, 3.0])
def test_roumieu_C_bound_per_index(r):
    # c_aa e^{(r/4) 2|a|} = 1: the diagonal factor balances at rate r/4 per index
    p = factorize_roumieu(mehler(0.5, 40), 0.5, r)
    assert check_bound(p.C, 0.5, r / 4) == pytest.approx(1.0, abs=1e-12)


# -- partition ------------------------------------------------------------------------


def test_partition_zero_tensor():
    part = theta_partition(CoeffTensor.zeros(1, 1, 5, 5), 0.5, jmax=3)
    assert part.theta == [-1, -1, -1, -1]
    assert set(part.blocks.values()) == {1}


def test_partition_single_entry():
    A = CoeffTensor(1, 1, 6, 6, {((0,), (3,)): 1.0})
    part = theta_partition(A, 0.5, jmax=3)
    assert part.theta == [3, 3, 3, 3]
    assert sorted(b[0] for b in part.members(1)) == [0, 1, 2, 3, 4]


def test_partition_brute_force():
    A = gauss_diag(32)
    part = theta_partition(A, 1.0, jmax=8)
    for N in range(9):
        best = -1
        for n in range(33):
            w = 2 * math.sqrt(n)
            if math.exp(-n * n) >= math.exp(-2 * (N + 1) * w):
                best = max(best, n)
        assert part.theta[N] == best
    check_partition_laws(A, part)


@given(st.integers(0, 2**31), st.sampled_from([0.5, 1.0, 2.0]), st.integers(1, 6))
def test_partition_laws(seed, s, jmax):
    A = random_gs(10, seed=seed, s=s, r=0.7, d_right=2, n_entries=30)
    part = theta_partition(A, s, jmax=jmax)
    check_partition_laws(A, part)
    assert set(part.blocks.values()) <= set(range(1, jmax + 2))


def test_partition_polynomial_weights():
    A = poly_dense(16)
    part = theta_partition(A, weight="polynomial")
    check_partition_laws(A, part)
    with pytest.raises(ValidationError):
        theta_partition(A, weight="bogus")
    with pytest.raises(ValidationError):
        theta_partition(A, 0.5, jmax=0)


# -- Beurling / Schwartz ------------------------------------------------------------------


def test_beurling_origin_and_zero():
    A = rank_one((0,), (0,), 4)
    p = factorize_beurling(A, 1.0)
    assert p.B == A and p.C[(0,), (0,)] == 1.0
    with pytest.raises(ValidationError):
        factorize_beurling(CoeffTensor.zeros(1, 1, 3, 3), 1.0)


def test_beurling_gaussian_diagonal():
    A16, A32 = gauss_diag(16), gauss_diag(32)
    p16, p32 = factorize_beurling(A16, 1.0), factorize_beurling(A32, 1.0)
    assert reconstruction_error(A32, p32.product()) <= 1e-12
    for r in (1, 2, 4):
        b16, b32 = check_bound(p16.B, 1.0, r), check_bound(p32.B, 1.0, r)
        assert math.isfinite(b32) and abs(b32 / b16 - 1) < 0.05
        assert math.isfinite(check_bound(p32.C, 1.0, r))


def test_beurling_random():
    A = random_gs(24, seed=4, s=1.0, r=2.0)
    assert reconstruction_error(A, factorize_beurling(A, 1.0).product()) <= 1e-12


def test_schwartz_examples():
    A = rank_one((0,), (0,), 4)
    p = factorize_schwartz(A)
    assert p.B == A and p.C[(0,), (0,)] == 1.0
    bounds = []
    for N in (16, 32):
        A = poly_dense(N)
        p = factorize_schwartz(A)
        assert reconstruction_error(A, p.product()) <= 1e-12
        _, betas, vals = p.B.arrays()
        bounds.append(np.max(np.abs(vals) * (1 + betas[:, 0] ** 2.0) ** 2))
    assert math.isfinite(bounds[1]) and abs(bounds[1] / bounds[0] - 1) < 0.05


# -- inner dimension, positivity, dispatcher --------------------------------------------


def test_extend_inner_dim():
    A = mehler(0.5, 10)
    p = factorize_roumieu(A, 0.5, 0.5)
    e = extend_inner_dim(p, 2)
    assert e.d0 == 2 and e.tensor_order == (0,)
    assert e.B.d_right == 2 and e.C.d_left == 2
    assert np.max(np.abs(e.product().to_dense() - A.to_dense())) <= 1e-14
    # projecting the extra index against h_0 gives back the original factors
    back_C = {(a[:1], b): v for (a, b), v in e.C.items() if a[1:] == (0,)}
    assert CoeffTensor(1, 1, 10, 10, back_C) == p.C
    assert extend_inner_dim(extend_inner_dim(p, 2), 3).C == extend_inner_dim(p, 3).C
    with pytest.raises(ValidationError):
        extend_inner_dim(p, 1)


def test_positive_diagonal_examples():
    p = factorize_roumieu(mehler(0.5, 8), 0.5, 0.5)
    ok, diag = is_positive_hermite_diagonal(p.C)
    assert ok and diag.eigenvalues[(3,)] == pytest.approx(math.exp(-0.75))
    assert not is_positive_hermite_diagonal(CoeffTensor(1, 1, 1, 1, {((0,), (1,)): 1.0}))[0]
    assert not is_positive_hermite_diagonal(CoeffTensor(1, 1, 1, 1, {((0,), (0,)): -1.0}))[0]
    ok, diag = is_positive_hermite_diagonal(extend_inner_dim(p, 3).C)
    assert ok and diag.tensor_order == (0, 0)


def test_factorize_dispatch():
    A = mehler(0.5, 8)
    with pytest.raises(ValidationError):
        factorize(A, "bogus", s=0.5)
    with pytest.raises(ValidationError):
        factorize(CoeffTensor.zeros(1, 1, 3, 3), "beurling", s=0.5)
    with pytest.raises(ValidationError):
        factorize(A, "beurling", s=0.5, r=1.0)
    assert factorize(A, "roumieu", s=0.5, d0=2).d0 == 2


def test_factorize_adjoint_trick():
    # d_left = 1 < d0 = 1 < d_right = 2 routes through the adjoint
    A = random_gs(5, seed=2, d_left=1, d_right=2)
    p = factorize(A, "roumieu", s=0.5, d0=1)
    assert p.diagonal == "B" and p.B.d_right == 1 and p.C.d_left == 1
    assert reconstruction_error(A, p.product()) <= 1e-12
    assert is_positive_hermite_diagonal(adjoint(p.B))[0]
    with pytest.raises(ValidationError):
        factorize(random_gs(3, seed=2, d_left=2, d_right=3), "roumieu", s=0.5, d0=1)


@given(st.integers(0, 2**31), st.sampled_from(["roumieu", "beurling", "schwartz"]),
       st.integers(1, 2), st.integers(1, 2))
def test_exact_reconstruction_and_positivity(seed, branch, dl, dr):
    A = random_gs(6, seed=seed, s=1.0, r=0.8, d_left=dl, d_right=dr)
    p = factorize(A, branch, s=1.0)
    assert reconstruction_error(A, p.product()) <= 1e-12
    assert verify_pair(A, p)["positive_diagonal"]


def test_pair_serialization():
    p = factorize(mehler(0.5, 6), "beurling", s=0.5, d0=2)
    q = FactorPair.from_dict(p.to_dict())
    assert q.B == p.B and q.C == p.C and q.tensor_order == (0,) and q.d0 == 2
    assert set(p.to_dict()) == {"branch", "params", "d0", "B", "C"}


def test_chain():
    A = mehler(0.5, 64)
    two = factor_chain(A, 0.5, 2)
    single = factorize(A, "roumieu", s=0.5)
    assert two.factors == [single.B, single.C]
    five = factor_chain(A, 0.5, 5)
    assert len(five) == 5
    assert reconstruction_error(A, five.product()) <= 1e-10
    assert all(is_positive_hermite_diagonal(C)[0] for C in five.factors[1:])
    with pytest.raises(ValidationError):
        factor_chain(A, 0.5, 1)


def test_verify_pair_report():
    A = mehler(0.5, 16)
    rep = verify_pair(A, factorize(A, "roumieu", s=0.5), s=0.5)
    assert rep["reconstruction_error"] <= 1e-14 and rep["positive_diagonal"]
    assert rep["decay"]["A"]["r_hat"] == pytest.approx(0.5)
