"""The global lattice eigenfunction Phi and the Hecke operators acting on
it.

Phi(L) is m'_L times the product of the local eigenfunction values at the
primes supporting L, the product skipping primes dividing pdN. T_ell is
evaluated two independent ways: by decomposing the ell + 1 sublattices into
homothety classes with witness bookkeeping, and by the local Laplacian at
ell; both must give mu_ell * Phi(L).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Tuple

from sympy import divisors, isprime

from .coefficients import CoeffField, FieldElement
from .lattices import ContextS, Lattice, homothety_witness, in_KSq, m_of, m_prime
from .localtrees import (
    SplitVertex,
    delta_psi_inert,
    delta_psi_split,
    local_vertex_inert,
    local_vertex_split,
    psi_inert,
    psi_split,
)
from .quadratic import KElement, splitting_type


class GlobalPhiError(ValueError):
    pass


class PhiEvaluator:
    """Bundles the S-data, coefficient field, and character; caches Phi
    values and the per-prime eigenvalues mu_ell."""

    __slots__ = ("ctx", "F", "chi", "_mu", "_values")

    def __init__(self, ctx: ContextS, F: CoeffField, chi):
        if chi.F is not F:
            raise GlobalPhiError("character values live in a different coefficient field")
        self.ctx = ctx
        self.F = F
        self.chi = chi
        self._mu: Dict[int, FieldElement] = {}
        self._values: Dict[tuple, FieldElement] = {}

    @property
    def K(self):
        return self.ctx.K

    def mu(self, ell: int) -> FieldElement:
        got = self._mu.get(ell)
        if got is None:
            st = splitting_type(self.K, ell)
            if st == "split":
                cl, clp = self.chi.chi_pair(ell)
                got = cl + clp
            elif st == "inert":
                got = self.F.zero
            else:
                raise GlobalPhiError(f"{ell} is ramified; no eigenvalue is defined")
            self._mu[ell] = got
        return got


def _local_factor(ev: PhiEvaluator, w: int, L: Lattice) -> FieldElement:
    if splitting_type(ev.K, w) == "inert":
        return psi_inert(ev.F, w, local_vertex_inert(ev.K, w, L))
    return psi_split(ev.F, ev.chi, w, local_vertex_split(ev.K, w, L))


def phi(ev: PhiEvaluator, L: Lattice) -> FieldElement:
    """m'_L times the restricted product of local eigenfunction values."""
    key = L.key()
    got = ev._values.get(key)
    if got is not None:
        return got
    sup = L.support_primes()
    if ev.F.characteristic in sup:
        raise GlobalPhiError(
            f"{ev.F.characteristic} is not invertible in the coefficient field"
        )
    total = ev.F.embed(m_prime(ev.ctx, L))
    for w in sup:
        if ev.ctx.pdN % w == 0:
            continue
        total = total * _local_factor(ev, w, L)
    ev._values[key] = total
    return total


def pairing(ev: PhiEvaluator, L0: Lattice) -> FieldElement:
    """Pairing of Phi with the homology generator at L0; each lattice serves
    as its own orbit representative, so this is phi(L0) by construction."""
    return phi(ev, L0)


@dataclass
class OrbitClassSummand:
    lattice: Lattice
    r: Fraction
    n: int
    m: int
    d: int
    e: int
    phi: FieldElement

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "d": self.d,
            "e": self.e,
            "n": self.n,
            "r": str(self.r),
            "phi": str(self.phi),
        }


@dataclass
class HeckeReport:
    ell: int
    summands: List[OrbitClassSummand]
    lhs: FieldElement
    rhs: FieldElement
    lhs_laplacian: FieldElement
    equal: bool

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "summands": [s.to_dict() for s in self.summands],
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "lhs_laplacian": str(self.lhs_laplacian),
            "pass": self.equal,
        }


def _vertex_depth(ev: PhiEvaluator, ell: int, L: Lattice) -> Tuple[object, int]:
    """(local vertex, its distance from the idealistic locus)."""
    if splitting_type(ev.K, ell) == "inert":
        v = local_vertex_inert(ev.K, ell, L)
        return v, v.tier
    v = local_vertex_split(ev.K, ell, L)
    return v, v.k


def hecke_decompose(ctx: ContextS, ev: PhiEvaluator, L0: Lattice, ell: int) -> HeckeReport:
    """Decompose T_ell at L0 into homothety-class summands and check the
    result against mu_ell * Phi(L0) and against the Laplacian route."""
    if not isprime(ell):
        raise GlobalPhiError(f"{ell} is not prime")
    if ctx.pdN % ell == 0:
        raise GlobalPhiError(f"{ell} divides pdN")
    F = ev.F
    if F.characteristic == ell:
        raise GlobalPhiError(f"{ell} is not invertible in the coefficient field")

    subs = L0.sublattices_index_ell(ell)
    m0, _ = m_of(ctx, L0)
    v0, depth0 = _vertex_depth(ev, ell, L0)

    buckets: Dict[int, List[Lattice]] = {}
    for S in sorted(subs, key=lambda T: T.key()):
        buckets.setdefault(m_of(ctx, S)[0], []).append(S)

    summands: List[OrbitClassSummand] = []
    lhs = F.zero
    for mj in sorted(buckets):
        classes: List[dict] = []
        for S in buckets[mj]:
            placed = False
            for cl in classes:
                w = homothety_witness(ctx, cl["rep"], S)
                if w is not None:
                    cl["members"].append((S, w[1]))
                    placed = True
                    break
            if not placed:
                classes.append({"rep": S, "members": [(S, Fraction(1))]})
        for cl in classes:
            rep: Lattice = cl["rep"]
            members = cl["members"]
            nj = len(members)
            dj = lcm(m0, mj) // m0
            ej = lcm(m0, mj) // mj
            if ej * mj != dj * m0:
                raise GlobalPhiError("summand degrees violate e*m = d*m0")
            if nj % dj:
                raise GlobalPhiError(f"class size {nj} is not divisible by d = {dj}")
            phij = phi(ev, rep)
            thetas = {ctx.theta(r) for (_S, r) in members}
            if len(thetas) > 1:
                # contributions of one class must share their theta value;
                # a mismatch can only be harmless when the class contributes 0
                if phij != F.zero:
                    raise GlobalPhiError("theta is inconsistent across one class")
                th = 1
            else:
                th = thetas.pop()
            _vj, depthj = _vertex_depth(ev, ell, rep)
            if depthj == 0 and dj != 1:
                raise GlobalPhiError("idealistic summand with d != 1")
            if depthj == depth0 - 1 and dj != 1:
                raise GlobalPhiError("downhill-inner summand with d != 1")
            r_report = members[1][1] if nj > 1 else Fraction(1)
            summands.append(OrbitClassSummand(rep, r_report, nj, mj, dj, ej, phij))
            lhs = lhs + F.embed((nj // dj) * ej * th) * phij

    if sum(s.n for s in summands) != ell + 1:
        raise GlobalPhiError("class sizes do not add up to ell + 1")
    summands.sort(key=lambda s: (s.m, s.lattice.key()))

    mu = ev.mu(ell)
    rhs = mu * phi(ev, L0)

    if splitting_type(ev.K, ell) == "inert":
        delta = delta_psi_inert(F, ell, v0)
    else:
        delta = delta_psi_split(F, ev.chi, ell, v0)
    rest = F.one
    for w in L0.support_primes():
        if w == ell or ctx.pdN % w == 0:
            continue
        if F.characteristic == w:
            raise GlobalPhiError(f"{w} is not invertible in the coefficient field")
        rest = rest * _local_factor(ev, w, L0)
    lhs_lap = F.embed(m_prime(ctx, L0)) * delta * rest

    equal = lhs == rhs and lhs == lhs_lap
    return HeckeReport(ell, summands, lhs, rhs, lhs_lap, equal)


def hecke_Tll(ev: PhiEvaluator, L: Lattice, ell: int) -> int:
    """T_{ell,ell} acts by theta(ell); asserted on L, the sign returned."""
    if ev.ctx.pdN % ell == 0:
        raise GlobalPhiError(f"{ell} divides pdN")
    th = ev.ctx.theta(Fraction(ell))
    left = phi(ev, L.scale_rational(Fraction(ell)))
    right = ev.F.embed(th) * phi(ev, L)
    if left != right:
        raise GlobalPhiError(f"scaling by {ell} does not act by theta = {th}")
    return th


def _random_lattice(ctx: ContextS, rng: random.Random, index_bound: int, skip: int) -> Lattice:
    while True:
        det = rng.randint(1, index_bound)
        if gcd(det, skip) != 1:
            continue
        a = Fraction(rng.choice(divisors(det)))
        c = Fraction(det) / a
        b = Fraction(rng.randrange(int(c)))
        return Lattice(ctx.K, a, b, c)


def invariance_suite(
    ctx: ContextS, ev: PhiEvaluator, samples: int, index_bound: int, seed: int = 0
) -> dict:
    """Random check that Phi is constant on K_{S,q} orbits and transforms by
    theta under rational scaling."""
    from .classgroup import _sample_ksq, _sample_rational

    rng = random.Random(seed)
    F = ev.F
    skip = ctx.pdN * (F.characteristic or 1)
    delta0 = ctx.delta0
    if not in_KSq(ctx, delta0):
        raise GlobalPhiError("the unit generator fails the K_{S,q} membership test")
    failures: List[str] = []
    flavors = {"one": 0, "unit": 0, "generic": 0, "mixed": 0}

    for i in range(samples):
        L = _random_lattice(ctx, rng, index_bound, skip)
        base = phi(ev, L)

        pick = i % 4
        if pick == 0:
            alpha, flavor = KElement(ctx.K, 1, 0), "one"
        elif pick == 1:
            alpha, flavor = delta0 ** rng.randint(1, 2), "unit"
        elif pick == 2:
            alpha, flavor = _sample_ksq(ctx, rng), "generic"
        else:
            alpha, flavor = _sample_ksq(ctx, rng) * delta0, "mixed"
        if not in_KSq(ctx, alpha):
            raise GlobalPhiError("sampler produced an element outside K_{S,q}")
        flavors[flavor] += 1
        if phi(ev, L.scale(alpha)) != base:
            failures.append(f"alpha-invariance at {L.key()} flavor {flavor}")

        r = _sample_rational(ctx, rng, skip)
        if phi(ev, L.scale_rational(r)) != F.embed(ctx.theta(r)) * base:
            failures.append(f"rational scaling at {L.key()} r = {r}")

    return {
        "samples": samples,
        "flavors": flavors,
        "failures": failures,
        "pass": not failures,
    }
