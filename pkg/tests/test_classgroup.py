import pytest

from heckephi.classgroup import (
    CharacterError,
    chi_eval,
    class_count_exhaustive,
    class_group,
    emit_chi_table,
    load_chi_table,
    make_character,
    verify_conditions,
)
from heckephi.coefficients import coeff_field
from heckephi.quadratic import QuadraticField, factor_principal, prime_ideals_above


def test_class_group_229(K, G):
    assert G.h == 3
    assert class_count_exhaustive(K) == 3
    assert len(G.generators) == 1
    P, order = G.generators[0]
    assert P.label() == "lam3" and order == 3
    lam, lamp = prime_ideals_above(K, 3)
    assert G.exponents_of_prime(lam) == (1,)
    assert G.exponents_of_prime(lamp) == (2,)


def test_trivial_class_groups():
    for d0 in (2, 3, 5):
        Kd = QuadraticField(d0)
        assert class_group(Kd).h == 1
        assert class_count_exhaustive(Kd) == 1


def test_character_values(G, F7, chi3):
    lam, lamp = prime_ideals_above(G.K, 3)
    assert chi3.chi_prime(lam) == F7.embed(2)
    assert chi3.chi_prime(lamp) == F7.embed(4)
    assert chi3.chi_pair(3) == (F7.embed(2), F7.embed(4))
    assert chi3.chi_pair(5) == (F7.embed(2), F7.embed(4))
    assert chi3.order == 3
    assert not chi3.is_tabular


def test_character_trivial_on_principal(K, G, F7, chi3):
    for x in (K.elem(3), K.elem(6), K.omega, K.elem(5, 2)):
        assert chi_eval(chi3, factor_principal(K, x)) == F7.one


def test_make_character_rejections(G, F7):
    with pytest.raises(CharacterError):
        make_character(G, 2, F7)
    with pytest.raises(CharacterError):
        make_character(G, 9, F7)
    chi1 = make_character(G, 1, F7)
    assert chi1.order == 1
    lam, _ = prime_ideals_above(G.K, 3)
    assert chi1.chi_prime(lam) == F7.one


def test_verify_conditions(ctx7, chi3):
    out = verify_conditions(chi3, ctx7, samples=40, seed=0)
    assert out["status"] == "pass"
    assert out["condition1"]["failures"] == 0
    assert out["condition2"]["failures"] == 0
    assert out["condition3"]["order"] == 3


def test_chi_table_round_trip(G, F7, chi3):
    text = emit_chi_table(chi3)
    assert "3 split_first 1 1" in text
    loaded = load_chi_table(text, G, 3, F7)
    assert loaded.is_tabular
    for ell in (3, 5):
        assert loaded.chi_pair(ell) == chi3.chi_pair(ell)
    (p2,) = prime_ideals_above(G.K, 2)
    assert loaded.chi_prime(p2) == chi3.chi_prime(p2)


def test_chi_table_rejects_garbage(G, F7):
    with pytest.raises(CharacterError):
        load_chi_table("3 split_first 1\n", G, 3, F7)
    with pytest.raises(CharacterError):
        load_chi_table("3 nonsense 1 1\n", G, 3, F7)
    with pytest.raises(CharacterError):
        load_chi_table("3 split_first x 1\n", G, 3, F7)
    # exponent tuple inconsistent with the class group
    with pytest.raises(CharacterError):
        load_chi_table("3 split_first 2 1\n", G, 3, F7)


def test_chi_table_modulus_guard(G, F7):
    chi = load_chi_table("2 inert - 0\n", G, 3, F7, modulus=3)
    lam, _ = prime_ideals_above(G.K, 3)
    with pytest.raises(CharacterError):
        chi.chi_prime(lam)


def test_character_in_cyclotomic(G, F0, chi0):
    from heckephi.coefficients import make_root_of_unity

    z = make_root_of_unity(F0, 3)
    assert chi0.chi_pair(3) == (z, z * z)
    assert chi0.chi_pair(3)[0] + chi0.chi_pair(3)[1] == F0.embed(-1)
