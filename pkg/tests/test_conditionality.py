from itertools import combinations
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgbasis import BudgetExceeded, ValidationError
from qgbasis import conditionality as cond
from qgbasis.olevskii import olevskii_basis
from qgbasis.spaces import (GramSpace, SequenceSpace, canonical_basis, gram_basis,
                            gram_from_weighted_trig, rotated_pair_basis, weighted_trig_basis)

from oracles import kn_enumerate, projection_norm_ascent, projection_norm_geneig, random_gram

RHO = np.array([[1.0, 0.6], [0.6, 1.0]])


def c0_l1_pair(n):
    return rotated_pair_basis(canonical_basis(SequenceSpace(math.inf, n)),
                              canonical_basis(SequenceSpace(1, n)))


def test_projection_norm_examples():
    b = gram_basis(RHO)
    assert cond.projection_norm(b, [0]) == pytest.approx(1.25, abs=1e-12)
    assert cond.projection_norm(b, [0, 1]) == 1.0
    assert cond.projection_norm(b, []) == 0.0
    onb = canonical_basis(GramSpace(np.eye(5)))
    for A in ([0], [1, 3], [0, 2, 4]):
        assert cond.projection_norm(onb, A) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_projection_norm_vs_geneig(d, seed):
    rng = np.random.default_rng(seed)
    G = random_gram(d, rng)
    b = gram_basis(G)
    for m in range(1, d):
        for A in combinations(range(d), m):
            assert cond.projection_norm(b, A) == pytest.approx(
                projection_norm_geneig(G, A), rel=1e-9)


def test_projection_norm_vs_direct_ascent(rng):
    G = random_gram(5, rng)
    b = gram_basis(G)
    for A in [(0,), (1, 3), (0, 2, 4)]:
        assert cond.projection_norm(b, A) == pytest.approx(projection_norm_ascent(G, A),
                                                           abs=1e-6)


def test_projection_norm_complement_symmetry(rng):
    b = gram_basis(random_gram(6, rng))
    A = (0, 2, 3)
    assert cond.projection_norm(b, A) == pytest.approx(cond.projection_norm(b, (1, 4, 5)),
                                                       rel=1e-10)


def test_spectral_witness_attains_norm(rng):
    b = gram_basis(random_gram(6, rng))
    A = (1, 4)
    r, x = cond._spectral_witness(b, A)
    assert cond.witness_ratio(b, A, x) == pytest.approx(r, rel=1e-10)


def test_general_projection_lower_bound():
    X = c0_l1_pair(3)
    w = cond.general_projection_lower(X, (0, 2, 4), trials=16, seed=1)
    assert w.ratio >= math.sqrt(10) / 2 - 1e-12
    assert w.recompute(X) == pytest.approx(w.ratio, abs=1e-12)


def test_k_n_exact_examples():
    b = gram_basis(RHO)
    assert cond.k_n_exact(b, 1) == pytest.approx(1.25, abs=1e-12)
    assert cond.k_n_exact(b, 2) == pytest.approx(1.25, abs=1e-12)
    onb = canonical_basis(GramSpace(np.eye(7)))
    for N in range(1, 5):
        assert cond.k_n_exact(onb, N) == pytest.approx(1.0, abs=1e-12)


def test_k_n_exact_babenko_enumeration():
    _, b = gram_from_weighted_trig(0.25, 4)
    H = b.gram
    ref = kn_enumerate(H, 4)
    assert cond.k_n_exact(b, 4) == pytest.approx(ref, rel=1e-9)
    row = cond.k_n_lower(b, 4, strategies=(cond.RANDOM,), trials=400, seed=5)
    assert row.lower <= ref + 1e-9
    full = cond.k_n_lower(b, 4, seed=5)
    assert full.exact == pytest.approx(ref, rel=1e-9)
    assert full.lower == pytest.approx(ref, rel=1e-9)


def test_k_n_exact_budget():
    b = gram_basis(random_gram(20, np.random.default_rng(2)))
    with pytest.raises(BudgetExceeded) as info:
        cond.k_n_exact(b, 6, budget=1000)
    assert info.value.required > info.value.budget == 1000


def test_k_n_monotone(rng):
    b = gram_basis(random_gram(7, rng))
    vals = [cond.k_n_exact(b, N) for N in range(1, 8)]
    assert all(a <= b_ + 1e-12 for a, b_ in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(vals[-2])  # ||S_A|| = ||S_{A^c}||
    assert min(vals) >= 1.0 - 1e-12


def test_k_n_lower_identity():
    onb = canonical_basis(GramSpace(np.eye(6)))
    row = cond.k_n_lower(onb, 3, seed=0)
    assert row.lower == pytest.approx(1.0, abs=1e-12)


def test_k_n_lower_validation():
    onb = canonical_basis(GramSpace(np.eye(3)))
    with pytest.raises(ValidationError):
        cond.k_n_lower(onb, 4)
    with pytest.raises(ValidationError):
        cond.k_n_lower(onb, 2, strategies=("bogus",))


@pytest.mark.parametrize("N", [1, 2, 5, 32, 256])
def test_odd_block_c0_l1(N):
    w = cond.odd_block_witness(c0_l1_pair(N), N)
    assert w.ratio == pytest.approx(math.sqrt(1 + N * N) / 2, abs=1e-9)
    if N == 1:
        assert w.ratio == pytest.approx(math.sqrt(2) / 2)


# ||S_A x|| / ||x|| for the odd-block witness on the trigonometric pair
# (weights |t|^a and |t|^-a), frozen from 30-digit closed-form coefficients
PAIR = [(0.6, 8, 1.5781611975237170963), (0.3, 16, 1.1729746609616398858),
        (0.9, 4, 1.5448128964982630249)]


@pytest.mark.parametrize("alpha,N,ref", PAIR)
def test_odd_block_trig_pair_frozen(alpha, N, ref):
    X = rotated_pair_basis(weighted_trig_basis(-alpha, count=N),
                           weighted_trig_basis(alpha, count=N))
    assert cond.odd_block_witness(X, N).ratio == pytest.approx(ref, rel=1e-9)


def test_odd_block_growth_half():
    Ns = [8, 16, 32, 64]
    X = rotated_pair_basis(weighted_trig_basis(-0.5, count=64),
                           weighted_trig_basis(0.5, count=64))
    r = [cond.odd_block_witness(X, N).ratio for N in Ns]
    a = np.polyfit(np.log(Ns), np.log(r), 1)[0]
    assert 0.4 < a < 0.6


def test_odd_block_needs_pairs():
    onb = canonical_basis(GramSpace(np.eye(3)))
    with pytest.raises(ValidationError):
        cond.odd_block_witness(onb, 2)


def test_sign_norms_unweighted_constant():
    _, b = gram_from_weighted_trig(0.0, 10)
    _, _, norms = cond.random_sign_norms(b, 10, trials=64, seed=1)
    # normalized basis: every sign pattern has norm sqrt(2N+1)
    assert np.allclose(norms, math.sqrt(21), rtol=1e-12)


def test_sign_norms_khintchine_mean():
    _, b = gram_from_weighted_trig(0.25, 32)
    _, _, norms = cond.random_sign_norms(b, 32, trials=2000, seed=4)
    assert np.mean(norms ** 2) == pytest.approx(65, rel=0.1)


def test_sign_partition_witness():
    _, b = gram_from_weighted_trig(0.25, 32)
    w = cond.sign_partition_witness(b, 32, trials=256, seed=3)
    assert w.recompute(b) == pytest.approx(w.ratio, rel=1e-12)
    assert w.ratio >= 0.5 * 32 ** 0.25
    plain = cond.sign_partition_witness(b, 32, trials=256, seed=3, descent=False)
    assert w.info["min_norm"] <= plain.info["min_norm"] + 1e-12


def test_sign_partition_needs_frequencies():
    onb = canonical_basis(GramSpace(np.eye(5)))
    with pytest.raises(ValidationError):
        cond.sign_partition_witness(onb, 2)


def test_democracy_profiles():
    onb = canonical_basis(GramSpace(np.eye(16)))
    for r in cond.democracy_profile(onb, [1, 4, 9], trials=10, seed=0):
        assert r.sup == pytest.approx(math.sqrt(r.N)) and r.inf == pytest.approx(math.sqrt(r.N))
    c0 = canonical_basis(SequenceSpace(math.inf, 10))
    for r in cond.democracy_profile(c0, [1, 5, 10], trials=10, seed=0):
        assert r.sup == 1.0 and r.inf == 1.0
    psi = olevskii_basis(canonical_basis(GramSpace(np.eye(4))), 4).psi
    for r in cond.democracy_profile(psi, [1, 2, 7, 30], trials=10, seed=0):
        assert r.sup == pytest.approx(math.sqrt(r.N)) and r.inf == pytest.approx(math.sqrt(r.N))


def test_knH_witness_onb():
    ob = olevskii_basis(canonical_basis(GramSpace(np.eye(5))), 5)
    w = cond.knH_witness(ob, 16)
    assert w.ratio == pytest.approx(1.0, abs=1e-9)


def test_knH_witness_lifts_inner_ratio():
    a = 0.9
    X = rotated_pair_basis(weighted_trig_basis(-a, count=5), weighted_trig_basis(a, count=5))
    ob = olevskii_basis(X, 9)
    w = cond.knH_witness(ob, 2 ** 9, seed=1)
    N = w.info["N"]
    assert N == 9 and w.info["size"] <= 2 ** (N + 1)
    # the lift reproduces the inner ratio exactly
    assert w.ratio == pytest.approx(w.info["inner_ratio"], rel=1e-9)
    assert w.recompute(ob.psi) == pytest.approx(w.ratio, rel=1e-12)
    assert w.ratio > cond.knH_witness(ob, 16, seed=1).ratio


def test_knH_witness_range():
    ob = olevskii_basis(canonical_basis(GramSpace(np.eye(3))), 3)
    with pytest.raises(ValidationError):
        cond.knH_witness(ob, 1)
    with pytest.raises(ValidationError):
        cond.knH_witness(ob, 64)
