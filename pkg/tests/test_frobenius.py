"""Frobenius traces and determinants against the Hecke eigenvalues."""

import pytest

from heckephi.classgroup import IdealCharacter, load_chi_table
from heckephi.frobenius import (
    FrobeniusError,
    attachment_row,
    attachment_table,
    evenness_check,
    frobenius_charpoly,
    usable_primes,
)
from heckephi.globalphi import GlobalPhiError
from heckephi.lattices import Lattice


def test_charpoly_split(K, chi3, F7):
    tr, det = frobenius_charpoly(chi3, K, 3)
    assert tr == F7.embed(6) and det == F7.one
    cl, clp = chi3.chi_pair(5)
    tr5, det5 = frobenius_charpoly(chi3, K, 5)
    assert tr5 == cl + clp and det5 == F7.one


def test_charpoly_inert(K, chi3, F7):
    for ell in (2, 7, 13, 23):
        tr, det = frobenius_charpoly(chi3, K, ell)
        assert tr == F7.zero and det == -F7.one


def test_charpoly_guards(K, G, chi3, F7):
    with pytest.raises(FrobeniusError):
        frobenius_charpoly(chi3, K, 229)  # ramified
    chi_tab = load_chi_table("2 inert - 0\n", G, 3, F7, modulus=3)
    with pytest.raises(FrobeniusError):
        frobenius_charpoly(chi_tab, K, 3)  # divides the modulus


def test_evenness(G, chi3, F7):
    assert evenness_check(chi3)
    from heckephi.classgroup import make_character

    assert evenness_check(make_character(G, 1, F7))
    chi2 = IdealCharacter(G, 2, F7, [], prime_table={(2, "inert"): -F7.one})
    assert chi2.order == 2
    assert not evenness_check(chi2)


def test_attachment_row_inert(ctx7, ev7, F7):
    row = attachment_row(ctx7, ev7, 2)
    assert (row.ell, row.kind) == (2, "inert")
    assert row.a == F7.zero and row.tr == F7.zero
    assert row.A == -F7.one and row.det == -F7.one
    assert row.match
    d = row.to_dict()
    assert d == {
        "ell": 2,
        "kind": "inert",
        "a": "0",
        "A": "6",
        "tr": "0",
        "det": "6",
        "match": True,
    }


def test_attachment_row_split_with_panel(K, ctx7, ev7, F7):
    sink = []
    row = attachment_row(ctx7, ev7, 3, panel=[Lattice(K, 4, 0, 1)], sink=sink)
    assert row.match
    assert row.a == F7.embed(6) and row.A == F7.one
    # one report for O, one for the panel lattice
    assert [ell for ell, _rep in sink] == [3, 3]
    assert all(rep.equal for _ell, rep in sink)


def test_attachment_row_char0(ctx0, ev0, F0):
    row = attachment_row(ctx0, ev0, 3)
    assert row.match
    assert row.a == F0.embed(-1)
    assert row.A == F0.one and row.det == F0.one


def test_usable_primes(ctx7, ev7, ctx0, ev0):
    # 7 divides both pdN = 1603 and the characteristic
    assert usable_primes(ctx7, ev7, 20) == [2, 3, 5, 11, 13, 17, 19]
    # pdN = 916 = 4 * 229 drops 2; characteristic 0 drops nothing
    assert usable_primes(ctx0, ev0, 20) == [3, 5, 7, 11, 13, 17, 19]
    assert usable_primes(ctx7, ev7, 1) == []


def test_attachment_table_upto_20(ctx7, ev7):
    sink = []
    rows = attachment_table(ctx7, ev7, 20, sink=sink)
    assert [r.ell for r in rows] == [2, 3, 5, 11, 13, 17, 19]
    assert all(r.match for r in rows)
    assert [r.kind for r in rows] == [
        "inert", "split", "split", "split", "inert", "split", "split",
    ]
    assert len(sink) == len(rows)


def test_attachment_row_skips_bad_ell(ctx7, ev7):
    with pytest.raises(GlobalPhiError):
        attachment_row(ctx7, ev7, 7)
