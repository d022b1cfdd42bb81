"""Frobenius characteristic polynomials of the induced representation and
the attachment table comparing them with the Hecke eigenvalues.

The induced representation is never materialized as matrices: its trace and
determinant at a Frobenius element are basis-independent and the attachment
identity 1 - a_ell*X + A_ell*X^2 = det(I - rho(Frob_ell)X) consumes nothing
else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy import primerange

from .classgroup import IdealCharacter
from .coefficients import FieldElement
from .globalphi import HeckeReport, PhiEvaluator, hecke_Tll, hecke_decompose, phi
from .lattices import ContextS, Lattice
from .quadratic import QuadraticField, splitting_type, theta


class FrobeniusError(ValueError):
    pass


@dataclass
class AttachmentRow:
    """One prime's worth of the comparison: Hecke side (a, A) against the
    Galois side (tr, det)."""

    ell: int
    kind: str
    a: FieldElement
    A: FieldElement
    tr: FieldElement
    det: FieldElement
    match: bool

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "kind": self.kind,
            "a": str(self.a),
            "A": str(self.A),
            "tr": str(self.tr),
            "det": str(self.det),
            "match": self.match,
        }


def frobenius_charpoly(
    chi: IdealCharacter, K: QuadraticField, ell: int
) -> Tuple[FieldElement, FieldElement]:
    """(trace, determinant) of Frobenius at ell under the representation
    induced from chi: (chi(lambda) + chi(lambda'), 1) for split ell, (0, -1)
    for inert ell; the determinant equals theta(ell) in both cases."""
    st = splitting_type(K, ell)
    if st == "ramified":
        raise FrobeniusError(f"{ell} ramifies in K; no Frobenius row")
    if chi.modulus % ell == 0:
        raise FrobeniusError(f"{ell} divides the character modulus")
    F = chi.F
    if st == "split":
        cl, clp = chi.chi_pair(ell)
        tr, det = cl + clp, F.one
    else:
        tr, det = F.zero, -F.one
    if det != F.embed(theta(K, ell)):
        raise FrobeniusError("Frobenius determinant disagrees with theta")
    return tr, det


def evenness_check(chi: IdealCharacter) -> bool:
    """The induced representation sends complex conjugation to the identity
    exactly when chi has odd order."""
    return chi.order % 2 == 1


def attachment_row(
    ctx: ContextS,
    ev: PhiEvaluator,
    ell: int,
    panel: Sequence[Lattice] = (),
    sink: Optional[List[Tuple[int, HeckeReport]]] = None,
) -> AttachmentRow:
    """The comparison at one prime.

    a_ell is read off the T_ell decomposition at the base lattice O; every
    panel lattice must reproduce it (T_ell L' = a_ell Phi(L') exactly), and
    every decomposition is internally double-checked against the Laplacian
    route.  A_ell comes from T_{ell,ell}.  `sink`, when given, collects every
    (ell, HeckeReport) produced."""
    F = ev.F
    K = ev.K
    base = Lattice.standard(K)
    rep = hecke_decompose(ctx, ev, base, ell)
    if sink is not None:
        sink.append((ell, rep))
    if not rep.equal:
        raise FrobeniusError(f"Hecke routes disagree at ell = {ell} on O")
    a = rep.lhs * phi(ev, base).inverse()
    for Lp in panel:
        repp = hecke_decompose(ctx, ev, Lp, ell)
        if sink is not None:
            sink.append((ell, repp))
        if not repp.equal:
            raise FrobeniusError(
                f"Hecke routes disagree at ell = {ell} on {Lp.key()}"
            )
        if repp.lhs != a * phi(ev, Lp):
            raise FrobeniusError(
                f"panel lattice {Lp.key()} breaks the T_{ell} eigenvalue"
            )
    A = F.embed(hecke_Tll(ev, base, ell))
    tr, det = frobenius_charpoly(ev.chi, K, ell)
    return AttachmentRow(
        ell,
        splitting_type(K, ell),
        a,
        A,
        tr,
        det,
        a == tr and A == det,
    )


def usable_primes(ctx: ContextS, ev: PhiEvaluator, upto: int) -> List[int]:
    """Primes ell <= upto coprime to pdN and to the coefficient
    characteristic."""
    skip = ctx.pdN * (ev.F.characteristic or 1)
    return [ell for ell in primerange(2, upto + 1) if skip % ell]


def attachment_table(
    ctx: ContextS,
    ev: PhiEvaluator,
    upto: int,
    panel: Sequence[Lattice] = (),
    sink: Optional[List[Tuple[int, HeckeReport]]] = None,
) -> List[AttachmentRow]:
    """attachment_row over every usable prime ell <= upto, in ell order."""
    return [
        attachment_row(ctx, ev, ell, panel=panel, sink=sink)
        for ell in usable_primes(ctx, ev, upto)
    ]
