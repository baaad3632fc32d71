import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgbasis import ValidationError
from qgbasis.olevskii import (block_layout, haar_matrix, olevskii_basis, project_components,
                              reconstruct, verify_bonek)
from qgbasis.spaces import (GramSpace, SequenceSpace, canonical_basis, rotated_pair_basis,
                            weighted_trig_basis)


def trig_pair(alpha, n):
    return rotated_pair_basis(weighted_trig_basis(-alpha, count=n),
                              weighted_trig_basis(alpha, count=n))


def test_haar_small():
    s = 1 / math.sqrt(2)
    assert np.allclose(haar_matrix(1), [[s, s], [s, -s]])
    assert np.allclose(haar_matrix(2)[:, 0], 0.5)


@pytest.mark.parametrize("k", range(1, 11))
def test_haar_orthogonal(k):
    A = haar_matrix(k)
    assert np.max(np.abs(A.T @ A - np.eye(1 << k))) < 1e-12


def test_haar_range():
    with pytest.raises(ValidationError):
        haar_matrix(0)


def test_layout():
    lay = block_layout(5)
    assert lay.n[1:] == (0, 1, 4, 11, 26, 57)
    assert [lay.block_size(k) for k in range(1, 6)] == [2, 4, 8, 16, 32]
    assert block_layout(3).dim == 3 + 11 and sum(1 << k for k in range(1, 4)) == 14
    for i in range(sum(1 << k for k in range(1, 6))):
        k, l = lay.from_psi_index(i)
        assert lay.psi_index(k, l) == i


def test_onb_degenerates_to_onb():
    ob = olevskii_basis(canonical_basis(GramSpace(np.eye(4))), 4)
    assert np.max(np.abs(ob.psi.gram - np.eye(ob.dim))) < 1e-12


def test_onb_general_ambient():
    ob = olevskii_basis(canonical_basis(SequenceSpace(2, 3)), 3)
    assert ob.psi.kind == "hilbert"


def test_block_sum_and_coefficient():
    X = trig_pair(0.6, 3)
    ob = olevskii_basis(X, 5)
    B = ob.psi.B
    nx = X.ambient.dim
    for k in range(1, 6):
        sl = ob.layout.block_slice(k)
        # sum of the block is 2^(k/2) x_k
        s = B[:, sl].sum(axis=1)
        expect = np.zeros(B.shape[0])
        expect[:nx] = 2 ** (k / 2) * X.B[:, k - 1]
        assert np.allclose(s, expect, atol=1e-12)
        # each psi_{k,l} has x_k-coefficient 2^(-k/2)
        assert np.allclose(B[:nx, sl], 2 ** (-k / 2) * X.B[:, [k - 1]], atol=1e-14)


def test_too_few_inner_vectors():
    with pytest.raises(ValidationError):
        olevskii_basis(canonical_basis(GramSpace(np.eye(2))), 3)


def test_project_components_examples():
    ob = olevskii_basis(trig_pair(0.5, 2), 4)
    lay = ob.layout
    k, l = 3, 5
    v = np.zeros(ob.dim)
    v[lay.psi_index(k, l)] = 1.0
    lam, eta = project_components(ob, v)
    assert lam[k - 1] == pytest.approx(2 ** (-k / 2))
    sl = lay.block_slice(k)
    expect = -(2.0 ** -k) * np.ones(1 << k)
    expect[l] += 1
    assert np.allclose(eta[sl], expect)
    v = np.zeros(ob.dim)
    v[sl] = 1.0
    lam, eta = project_components(ob, v)
    assert np.allclose(eta, 0) and lam[k - 1] == pytest.approx(2 ** (k / 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_reconstruction(kmax, seed):
    ob = olevskii_basis(canonical_basis(GramSpace(np.eye(kmax))), kmax)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(ob.dim) + 1j * rng.standard_normal(ob.dim)
    lam, eta = project_components(ob, v)
    assert np.max(np.abs(reconstruct(ob, lam, eta) - v)) < 1e-12


def test_bonek_examples():
    ob = olevskii_basis(trig_pair(0.9, 3), 5)
    lhs, rhs = verify_bonek(ob, 3, [0, 4, 6])
    assert rhs == pytest.approx(15 / 8) and lhs == pytest.approx(15 / 8, abs=1e-12)
    lhs, rhs = verify_bonek(ob, 4, range(16))
    assert rhs == 0 and lhs == pytest.approx(0, abs=1e-12)
    lhs, rhs = verify_bonek(ob, 5, [7])
    assert lhs == pytest.approx(1 - 2 ** -5, abs=1e-12)
    with pytest.raises(ValidationError):
        verify_bonek(ob, 2, [4])
