from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heckephi.lattices import (
    ContextS,
    Lattice,
    LatticeError,
    augment_N,
    default_M,
    homothety_witness,
    in_KSq,
    k_homothety,
    m_of,
    m_prime,
)


def L(K, a, b, c):
    return Lattice(K, Fraction(a), Fraction(b), Fraction(c))


def test_hnf_normalization(K):
    M = Lattice.from_columns(K, ((4, 1), (0, 1)))
    assert M.key() == (4, 0, 1)
    assert M.det == 4
    N = Lattice.from_columns(K, ((2, 5), (1, 3)))
    assert N.det == abs(Fraction(2 * 3 - 5 * 1))
    a, b, c = N.key()
    assert a > 0 and c > 0 and 0 <= b < c


def test_literal_round_trip(K):
    for key in ((1, 0, 1), (4, 0, 1), (9, 0, 1), (3, 1, 2)):
        M = L(K, *key)
        assert Lattice.parse_literal(K, M.literal()) == M
    with pytest.raises(LatticeError):
        Lattice.parse_literal(K, "[[1,0],[0]]")
    with pytest.raises(LatticeError):
        Lattice.parse_literal(K, "nonsense")


def test_containment_and_index(K):
    O = Lattice.standard(K)
    M = L(K, 4, 0, 1)
    assert O.contains_lattice(M)
    assert not M.contains_lattice(O)
    assert M.index_in(O) == 4
    assert O.contains(K.omega) and O.contains(K.one)
    assert not O.contains(K.omega.scale(Fraction(1, 2)))


def test_sublattices_index_ell(K):
    O = Lattice.standard(K)
    for ell in (2, 3, 5):
        subs = O.sublattices_index_ell(ell)
        assert len(subs) == ell + 1
        assert len({S.key() for S in subs}) == ell + 1
        for S in subs:
            assert S.index_in(O) == ell


def test_support_primes(K):
    O = Lattice.standard(K)
    assert O.support_primes() == []
    assert L(K, 4, 0, 1).support_primes() == [2]
    # the numerator of b is invisible: Z_w*c absorbs it
    assert L(K, 1, 7, 97).support_primes() == [97]
    assert O.scale_rational(Fraction(1, 7)).support_primes() == [7]
    assert L(K, 6, 0, 5).support_primes() == [2, 3, 5]


def test_scaling_by_units_and_ideals(K, G):
    O = Lattice.standard(K)
    assert O.scale(K.epsilon) == O
    Li = Lattice.from_ideal(K, G.generators[0][0])
    assert Li.scale(K.epsilon) == Li
    assert Li.det == 3
    assert Li.is_idealistic()
    assert not L(K, 4, 0, 1).is_idealistic()


def test_m_invariants(ctx7, K, G):
    O = Lattice.standard(K)
    assert m_of(ctx7, O) == (8, -1)
    assert m_prime(ctx7, O) == 1
    assert m_of(ctx7, L(K, 4, 0, 1)) == (24, -1)
    assert m_prime(ctx7, L(K, 4, 0, 1)) == 3
    assert m_of(ctx7, L(K, 9, 0, 1)) == (24, -1)
    Li = Lattice.from_ideal(K, G.generators[0][0])
    assert m_of(ctx7, Li) == (8, -1)


def test_m_is_homothety_invariant(ctx7, K):
    M = L(K, 4, 0, 1)
    for alpha in (K.epsilon, K.elem(3), K.elem(1, 1), K.elem(2, 5)):
        assert m_of(ctx7, M.scale(alpha)) == m_of(ctx7, M)


def test_k_homothety_rational_scalings(K):
    O = Lattice.standard(K)
    for q in (Fraction(3), Fraction(1, 3), Fraction(5, 7)):
        w = k_homothety(O, O.scale_rational(q))
        assert w is not None
        assert (w.u, w.v) == (q, 0)
    assert k_homothety(O, O) == K.one


def test_k_homothety_exactness(K, G):
    O = Lattice.standard(K)
    # lam3 is not principal: no witness can exist
    Li = Lattice.from_ideal(K, G.generators[0][0])
    assert k_homothety(O, Li) is None
    # scaled copies of the same lattice always have one
    for alpha in (K.elem(1, 1), K.elem(0, 1), K.elem(3, -2)):
        M = L(K, 4, 0, 1)
        w = k_homothety(M, M.scale(alpha))
        assert w is not None
        assert M.scale(w) == M.scale(alpha)
        assert abs(w.norm()) == abs(alpha.norm())


def test_k_homothety_is_canonical(K):
    # the witness is independent of which unit multiple produced the target
    M = L(K, 4, 0, 1)
    alpha = K.elem(1, 1)
    target = M.scale(alpha)
    w1 = k_homothety(M, target)
    w2 = k_homothety(M, target.scale(K.one))
    assert w1 == w2
    eps6 = K.epsilon ** 6
    assert M.scale(eps6) == M
    w3 = k_homothety(M, M.scale(alpha * eps6))
    assert w3 == w1


def test_homothety_witness_splits_r(ctx7, K):
    O = Lattice.standard(K)
    got = homothety_witness(ctx7, O, O.scale_rational(Fraction(2)))
    assert got is not None
    beta, r = got
    assert (beta.u, beta.v) == (2, 0)
    assert r == Fraction(2)
    alpha = beta.scale(1 / r)
    assert in_KSq(ctx7, alpha)


def test_context_constants(K, ctx7, ctx0):
    assert (ctx7.M, ctx7.N, ctx7.p, ctx7.pdN) == (7, 1, 7, 1603)
    assert (ctx7.i_S, ctx7.sign_iS) == (8, -1)
    assert (ctx0.M, ctx0.N, ctx0.p, ctx0.pdN) == (4, 4, 1, 916)
    assert (ctx0.i_S, ctx0.sign_iS) == (6, 1)
    assert default_M(K, 7, 1) == 7
    assert augment_N(K, 7, 1) == 1
    assert augment_N(K, 1, 1) == 4
    assert default_M(K, 1, 4) == 4


def test_context_validation(K):
    with pytest.raises(LatticeError):
        ContextS(K, M=5, N=1, p=7)
    with pytest.raises(LatticeError):
        ContextS(K, M=2, N=1, p=7)


def test_lattice_invariants_reject_degenerate(K):
    with pytest.raises(LatticeError):
        Lattice(K, Fraction(0), Fraction(0), Fraction(1))
    with pytest.raises(LatticeError):
        Lattice.from_columns(K, ((1, 0), (2, 0)))


@settings(max_examples=40, deadline=None)
@given(
    x1=st.integers(-9, 9),
    y1=st.integers(-9, 9),
    x2=st.integers(-9, 9),
    y2=st.integers(-9, 9),
)
def test_hnf_is_basis_independent(K, x1, y1, x2, y2):
    det = x1 * y2 - x2 * y1
    if det == 0:
        return
    M = Lattice.from_columns(K, ((x1, y1), (x2, y2)))
    # swapping generators or negating one leaves the lattice fixed
    assert Lattice.from_columns(K, ((x2, y2), (x1, y1))) == M
    assert Lattice.from_columns(K, ((-x1, -y1), (x2, y2))) == M
    assert M.det == abs(Fraction(det))
