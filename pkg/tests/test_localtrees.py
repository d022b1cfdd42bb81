"""Tree combinatorics, local eigenfunctions, and the streamed sweeps."""

from fractions import Fraction

import pytest

from heckephi.lattices import Lattice, sublattices_index_ell
from heckephi.localtrees import (
    InertVertex,
    LocalTreeError,
    SplitVertex,
    ball_size,
    build_patch,
    delta_psi_inert,
    delta_psi_split,
    inert_vertex_of_key,
    iter_ball,
    laplacian_check,
    laplacian_sweep_inert,
    laplacian_sweep_split,
    local_vertex_inert,
    local_vertex_split,
    parent_key,
    patch_to_dot,
    psi_closed_vs_recursion,
    psi_inert,
    psi_split,
    split_vertex_of_key,
    sphere_size,
    sublattice_keys,
    sublattice_keys_hnf,
    theta_t_mu,
    transform_hat,
    validate_parent_edges,
)
from heckephi.quadratic import prime_ideals_above


def test_vertex_validation():
    assert InertVertex(0, 2).tier == 2
    assert InertVertex(1, 3).tier == 2
    assert SplitVertex(2, 0).idealistic
    assert not SplitVertex(0, 1).idealistic
    with pytest.raises(LocalTreeError):
        InertVertex(2, 3)
    with pytest.raises(LocalTreeError):
        InertVertex(1, 0)
    with pytest.raises(LocalTreeError):
        SplitVertex(0, -1)


@pytest.mark.parametrize("ell,radius", [(2, 3), (3, 2), (5, 2)])
def test_ball_and_sphere_formulas(ell, radius):
    keys = list(iter_ball(ell, radius))
    assert len(keys) == len(set(keys))
    assert len(keys) == ball_size(ell, radius)
    assert ball_size(ell, radius) == sum(
        sphere_size(ell, d) for d in range(radius + 1)
    )
    by_dist = {}
    for a, b, c in keys:
        by_dist[a + c] = by_dist.get(a + c, 0) + 1
    for d in range(radius + 1):
        assert by_dist[d] == sphere_size(ell, d)


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_sublattice_routes_agree(ell):
    for key in iter_ball(ell, 2):
        closed = sublattice_keys(ell, key)
        hnf = sublattice_keys_hnf(ell, key)
        assert len(closed) == ell + 1
        assert sorted(closed) == sorted(hnf)
        # each index-ell move lands one sphere in or out
        d = key[0] + key[2]
        for (a, b, c), content in closed:
            assert a + c == (d - 1 if content == 1 else d + 1)


def test_parent_edges_validate():
    out = validate_parent_edges(2, 4)
    assert out["pass"] and out["vertices_checked"] == 46
    out = validate_parent_edges(3, 3)
    assert out["pass"] and out["vertices_checked"] == 53
    assert parent_key(2, (1, 0, 0)) == (0, 0, 0)
    with pytest.raises(LocalTreeError):
        parent_key(2, (0, 0, 0))


def test_build_patch_shapes(K):
    p1 = build_patch(K, 3, 1, 2)
    assert len(p1.keys) == ball_size(3, 2) == 17
    assert len(p1.interior_indices()) == ball_size(3, 1) == 5
    # idealistic triples have b = 0: one per (a, c) split of each distance
    assert sum(p1.idealistic) == 5
    for i in p1.interior_indices():
        assert len(p1.downhill[i]) == 4
    for i in range(len(p1.keys)):
        if p1.dist[i] == 2:
            assert p1.downhill[i] == []

    p2 = build_patch(K, 2, 2, 2)
    assert len(p2.keys) == 2 * ball_size(2, 2) == 20
    assert sum(p2.idealistic) == 2  # both sheets over the root
    root0 = p2.index[((0, 0, 0), 0)]
    # downhill and uphill sheets partition the fiber over each child
    down, up = p2.downhill[root0], p2.uphill[root0]
    assert len(down) == len(up) == 3
    assert not set(down) & set(up)
    assert sorted(p2.keys[j][0] for j in down) == sorted(p2.keys[j][0] for j in up)

    with pytest.raises(LocalTreeError):
        build_patch(K, 2, 3, 1)
    with pytest.raises(LocalTreeError):
        build_patch(K, 2, 1, -1)
    with pytest.raises(LocalTreeError):
        build_patch(K, 5, 1, 9)  # above the vertex cap


def test_patch_to_dot(K):
    p1 = build_patch(K, 3, 1, 2)
    dot = patch_to_dot(p1)
    assert dot.startswith("digraph tree {")
    assert dot.count("->") == 20  # 5 interior vertices, 4 edges each
    assert dot.count("doublecircle") == 5
    with_vals = patch_to_dot(p1, values=lambda key: key[0])
    assert "psi=" in with_vals


def test_local_vertex_inert(K):
    O = Lattice.standard(K)
    assert local_vertex_inert(K, 2, O) == InertVertex(0, 0)
    assert local_vertex_inert(K, 2, Lattice(K, 4, 0, 1)) == InertVertex(0, 2)
    for L in sublattices_index_ell(O, 2):
        assert local_vertex_inert(K, 2, L) == InertVertex(0, 1)
    # scaling by ell^2 is a homothety, invisible after the even shift
    assert local_vertex_inert(K, 2, O.scale_rational(Fraction(4))) == InertVertex(0, 0)
    with pytest.raises(LocalTreeError):
        local_vertex_inert(K, 3, O)


def test_local_vertex_split(K):
    O = Lattice.standard(K)
    assert local_vertex_split(K, 3, O) == SplitVertex(0, 0)
    lam, lamp = prime_ideals_above(K, 3)
    Llam = Lattice.from_ideal(K, lam)
    Llamp = Lattice.from_ideal(K, lamp)
    assert local_vertex_split(K, 3, Llam) == SplitVertex(1, 0)
    assert local_vertex_split(K, 3, Llamp) == SplitVertex(-1, 0)
    # of the four index-3 sublattices exactly the two prime ideals are
    # idealistic; the rest hang off the apartment at distance 1
    verts = sorted(
        (local_vertex_split(K, 3, L).m, local_vertex_split(K, 3, L).k)
        for L in sublattices_index_ell(O, 3)
    )
    assert verts == [(-1, 0), (0, 1), (0, 1), (1, 0)]
    with pytest.raises(LocalTreeError):
        local_vertex_split(K, 2, O)


def test_split_vertex_of_key_matches_lattice_route(K):
    # the integer key invariant and the Hensel-embedding route agree on
    # every index-9 sublattice
    O = Lattice.standard(K)
    seen = set()
    for L1 in sublattices_index_ell(O, 3):
        for L2 in sublattices_index_ell(L1, 3):
            seen.add(local_vertex_split(K, 3, L2))
    assert seen == {
        SplitVertex(2, 0),
        SplitVertex(-2, 0),
        SplitVertex(1, 1),
        SplitVertex(-1, 1),
        SplitVertex(0, 2),
        SplitVertex(0, 0),  # ell * O, a homothety of the root
    }


def test_psi_inert_values(F0, F7):
    assert psi_inert(F0, 2, InertVertex(0, 0)) == F0.one
    assert psi_inert(F0, 2, InertVertex(1, 1)) == -F0.one
    assert psi_inert(F0, 2, InertVertex(0, 2)) == F0.embed_fraction(Fraction(1, 2))
    assert psi_inert(F0, 2, InertVertex(1, 3)) == F0.embed_fraction(Fraction(-1, 2))
    assert psi_inert(F0, 2, InertVertex(0, 4)) == F0.embed_fraction(Fraction(1, 4))
    # odd tiers vanish
    assert psi_inert(F0, 2, InertVertex(1, 2)) == F0.zero
    assert psi_inert(F7, 2, InertVertex(0, 1)) == F7.zero
    with pytest.raises(LocalTreeError):
        psi_inert(F7, 7, InertVertex(0, 0))


def test_theta_recursion(F7):
    mu = F7.embed(6)
    ell = F7.embed(3)
    seq = [theta_t_mu(F7, 3, mu, k) for k in range(8)]
    assert seq[0] == F7.one and seq[1] == F7.zero
    for k in range(2, 8):
        assert ell * seq[k] == mu * seq[k - 1] - seq[k - 2]
    assert [str(x) for x in seq[:5]] == ["1", "0", "2", "4", "5"]
    with pytest.raises(LocalTreeError):
        theta_t_mu(F7, 3, mu, -1)
    with pytest.raises(LocalTreeError):
        theta_t_mu(F7, 7, mu, 2)


def test_psi_split_heads(F7, chi3):
    cl, clp = chi3.chi_pair(3)
    assert (str(cl), str(clp)) == ("2", "4")
    assert psi_split(F7, chi3, 3, SplitVertex(0, 0)) == F7.one
    assert psi_split(F7, chi3, 3, SplitVertex(1, 0)) == cl
    assert psi_split(F7, chi3, 3, SplitVertex(2, 0)) == cl * cl
    # negative m runs along the conjugate prime
    assert psi_split(F7, chi3, 3, SplitVertex(-1, 0)) == clp
    assert psi_split(F7, chi3, 3, SplitVertex(-2, 0)) == clp * clp
    # theta_1 = 0 kills the first off-apartment shell
    assert psi_split(F7, chi3, 3, SplitVertex(0, 1)) == F7.zero
    assert psi_split(F7, chi3, 3, SplitVertex(1, 1)) == F7.zero


def test_delta_psi_closed_forms(F0, F7, chi3):
    # the label-level neighbor sums match the streamed sweeps' invariants
    for v in (InertVertex(0, 0), InertVertex(1, 1), InertVertex(0, 2), InertVertex(1, 3)):
        assert delta_psi_inert(F0, 2, v) == F0.zero
    cl, clp = chi3.chi_pair(3)
    mu = cl + clp
    for v in (SplitVertex(0, 0), SplitVertex(1, 0), SplitVertex(-1, 0), SplitVertex(0, 1)):
        assert delta_psi_split(F7, chi3, 3, v) == mu * psi_split(F7, chi3, 3, v)


def test_laplacian_sweeps(F0, F7, chi0, chi3):
    out = laplacian_sweep_inert(F0, 2, 3)
    assert out["pass"] and out["vertices_checked"] == 20
    out = laplacian_sweep_inert(F7, 2, 3)
    assert out["pass"] and out["vertices_checked"] == 20
    out = laplacian_sweep_split(F0, chi0, 3, 3)
    assert out["pass"] and out["vertices_checked"] == 17
    out = laplacian_sweep_split(F7, chi3, 5, 2)
    assert out["pass"] and out["vertices_checked"] == 7


def test_patch_laplacian_check(K, F0, chi0):
    p1 = build_patch(K, 3, 1, 2)
    cl, clp = chi0.chi_pair(3)
    out = laplacian_check(
        p1, lambda key: psi_split(F0, chi0, 3, split_vertex_of_key(3, key)), cl + clp
    )
    assert out["pass"] and out["vertices_checked"] == 5

    p2 = build_patch(K, 2, 2, 2)
    out = laplacian_check(
        p2, lambda key: psi_inert(F0, 2, inert_vertex_of_key(key[0], key[1])), F0.zero
    )
    assert out["pass"] and out["vertices_checked"] == 8

    with pytest.raises(LocalTreeError):
        laplacian_check(build_patch(K, 2, 1, 1), lambda key: F0.one, F0.zero)


def test_psi_closed_vs_recursion(F0):
    out = psi_closed_vs_recursion(F0, 2, 4)
    assert out["pass"] and out["labels_checked"] == 10


def test_transform_hat(K, F7, ctx7):
    # m'((4,0,1)) = 3 scales the local value
    got = transform_hat(ctx7, F7.embed(2), Lattice(K, 4, 0, 1))
    assert got == F7.embed(6)
    with pytest.raises(LocalTreeError):
        transform_hat(ctx7, F7.one, Lattice(K, 6, 0, 5))
