from fractions import Fraction

import pytest

from heckephi.coefficients import CoeffError, coeff_field, make_root_of_unity


def test_prime_field_arithmetic():
    F = coeff_field("Fp:7")
    assert F.characteristic == 7
    three = F.embed(3)
    five = F.embed(5)
    assert three + five == F.one
    assert three * five == F.one
    assert three.inverse() == five
    assert three ** -1 == five
    assert F.embed(-1) == F.embed(6)
    assert F.embed_fraction(Fraction(1, 2)) * F.embed(2) == F.one


def test_prime_field_rejects_bad_modulus():
    with pytest.raises(CoeffError):
        coeff_field("Fp:2")
    with pytest.raises(CoeffError):
        coeff_field("Fp:9")
    with pytest.raises(CoeffError):
        coeff_field("fp:7")
    with pytest.raises(CoeffError):
        coeff_field("padic:7")


def test_cyclotomic_relation():
    F = coeff_field("cyclotomic:3")
    z = make_root_of_unity(F, 3)
    assert z != F.one
    assert z ** 3 == F.one
    assert z * z + z + F.one == F.zero
    assert F.characteristic == 0
    half = F.embed(2).inverse()
    assert half + half == F.one


def test_root_of_unity_in_prime_field():
    F = coeff_field("Fp:7")
    z = make_root_of_unity(F, 3)
    assert z == F.embed(2)
    assert z ** 3 == F.one
    assert z ** 2 == F.embed(4)


def test_no_cube_root_in_bad_characteristic():
    F = coeff_field("Fp:5")
    with pytest.raises(CoeffError):
        make_root_of_unity(F, 3)


def test_division_and_subtraction():
    F = coeff_field("cyclotomic:3")
    z = make_root_of_unity(F, 3)
    w = (F.one - z) * (F.one - z * z)
    # (1-z)(1-z^2) = 3 for a primitive cube root
    assert w == F.embed(3)
    assert w * F.embed(3).inverse() == F.one
