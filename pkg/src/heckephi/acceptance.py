"""The executable acceptance suite.

Nine numbered criteria, each reporting one pass/fail line; shared verbatim
between the CLI `selftest` subcommand and the test suite.  The headline
attach run (d0 = 229, F_7, order-3 character, ell <= 100, a five-lattice
panel) is computed once and consumed by criteria 3, 4, and 6.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from .classgroup import class_count_exhaustive, class_group, make_character
from .coefficients import coeff_field
from .frobenius import attachment_table
from .globalphi import PhiEvaluator, _vertex_depth, invariance_suite
from .lattices import ContextS, Lattice, augment_N, default_M, m_of
from .localtrees import (
    laplacian_sweep_inert,
    laplacian_sweep_split,
    psi_closed_vs_recursion,
    validate_parent_edges,
)
from .quadratic import QuadraticField

INERT_PRIMES = (2, 7, 13)
SPLIT_PRIMES = (3, 5, 11)
PARENT_EDGE_PATCHES = ((2, 6), (7, 4), (13, 3))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    detail: str

    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} ({self.name}): {word} [{self.seconds:.1f}s] {self.detail}"


class Bundle:
    """Shared contexts: the headline F_7 stack, the characteristic-0 stack,
    and the memoized headline attach run."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.K = QuadraticField(229)
        self.G = class_group(self.K)
        self.F7 = coeff_field("Fp:7")
        self.chi3 = make_character(self.G, 3, self.F7)
        self.ctx7 = ContextS(self.K, M=7, N=1, p=7)
        self.ev7 = PhiEvaluator(self.ctx7, self.F7, self.chi3)
        self.F0 = coeff_field("cyclotomic:3")
        self.chi0 = make_character(self.G, 3, self.F0)
        N0 = augment_N(self.K, 1, 1)
        self.ctx0 = ContextS(self.K, M=default_M(self.K, 1, N0), N=N0, p=1)
        self.ev0 = PhiEvaluator(self.ctx0, self.F0, self.chi0)
        self._attach = None

    def panel(self) -> List[Lattice]:
        """Four lattices joining O: the class-generator ideal, two
        non-idealistic lattices, and a fractional scaling."""
        K = self.K
        gen = Lattice.from_ideal(K, self.G.generators[0][0])
        return [
            gen,
            Lattice.from_columns(K, ((Fraction(4), Fraction(1)), (Fraction(0), Fraction(1)))),
            Lattice.from_columns(K, ((Fraction(9), Fraction(1)), (Fraction(0), Fraction(1)))),
            gen.scale_rational(Fraction(1, 5)),
        ]

    def attach_run(self):
        """(rows, [(L0, ell, HeckeReport)]) for the headline run; the sink
        order is one O report then one per panel lattice for each prime."""
        if self._attach is None:
            panel = self.panel()
            sink: list = []
            rows = attachment_table(self.ctx7, self.ev7, 100, panel=panel, sink=sink)
            lineup = [Lattice.standard(self.K)] + panel
            if len(sink) % len(lineup):
                raise RuntimeError("attach sink is missing panel reports")
            triples = [
                (lineup[i % len(lineup)], ell, rep)
                for i, (ell, rep) in enumerate(sink)
            ]
            self._attach = (rows, triples)
        return self._attach


def criterion_laplacian(b: Bundle) -> Tuple[bool, str]:
    parts = []
    for ell in INERT_PRIMES:
        t0 = time.time()
        out = laplacian_sweep_inert(b.F0, ell, 5)
        if not out["pass"]:
            return False, f"inert {ell} violated at {out['first_violation']}"
        parts.append(f"inert {ell}: {out['vertices_checked']}v {time.time() - t0:.1f}s")
    for ell in SPLIT_PRIMES:
        t0 = time.time()
        out = laplacian_sweep_split(b.F0, b.chi0, ell, 5)
        if not out["pass"]:
            return False, f"split {ell} violated at {out['first_violation']}"
        parts.append(f"split {ell}: {out['vertices_checked']}v {time.time() - t0:.1f}s")
    return True, ", ".join(parts)


def criterion_closed_form(b: Bundle) -> Tuple[bool, str]:
    labels = 0
    for ell in INERT_PRIMES:
        out = psi_closed_vs_recursion(b.F0, ell, 6)
        if not out["pass"]:
            return False, f"ell {ell} mismatch at {out['first_violation']}"
        labels += out["labels_checked"]
    edges = 0
    for ell, radius in PARENT_EDGE_PATCHES:
        edges += validate_parent_edges(ell, radius)["vertices_checked"]
    return True, f"{labels} labels, {edges} patch vertices"


def criterion_summand_invariants(b: Bundle) -> Tuple[bool, str]:
    _rows, triples = b.attach_run()
    count = 0
    for L0, ell, rep in triples:
        m0 = m_of(b.ctx7, L0)[0]
        depth0 = _vertex_depth(b.ev7, ell, L0)[1]
        total_n = 0
        for s in rep.summands:
            if s.e * s.m != s.d * m0:
                return False, f"e*m != d*m0 at ell = {ell}, L0 = {L0.key()}"
            depth = _vertex_depth(b.ev7, ell, s.lattice)[1]
            if (depth == 0 or depth == depth0 - 1) and s.d != 1:
                return False, f"d != 1 on an idealistic/inner class at ell = {ell}"
            total_n += s.n
            count += 1
        if total_n != ell + 1:
            return False, f"sum of n is {total_n} != {ell + 1} at ell = {ell}"
    return True, f"{count} summands over {len(triples)} decompositions"


def criterion_dual_route(b: Bundle) -> Tuple[bool, str]:
    _rows, triples = b.attach_run()
    lattices = set()
    pairs = 0
    for L0, ell, rep in triples:
        if rep.lhs != rep.lhs_laplacian:
            return False, f"routes disagree at ell = {ell}, L0 = {L0.key()}"
        if ell <= 50:
            lattices.add(L0.key())
            pairs += 1
    if len(lattices) < 5:
        return False, f"only {len(lattices)} lattices in the panel"
    return True, f"{pairs} (L0, ell) pairs with ell <= 50 over {len(lattices)} lattices"


def criterion_invariance(b: Bundle) -> Tuple[bool, str]:
    out = invariance_suite(b.ctx7, b.ev7, 500, 10**4, seed=b.seed)
    if not out["pass"]:
        return False, f"failures: {out['failures'][:3]}"
    return True, f"{out['samples']} samples, flavors {out['flavors']}"


def criterion_headline_attach(b: Bundle) -> Tuple[bool, str]:
    h_oracle = class_count_exhaustive(b.K)
    if b.G.h != h_oracle:
        return False, f"class number {b.G.h} disagrees with the oracle {h_oracle}"
    if b.G.h != 3:
        return False, f"class number {b.G.h} != 3"
    rows, _triples = b.attach_run()
    minus_one = b.F7.embed(-1)
    for r in rows:
        if not r.match:
            return False, f"mismatch at ell = {r.ell}"
        if r.kind == "inert" and not (r.a == b.F7.zero and r.A == minus_one):
            return False, f"inert row at ell = {r.ell} is not (0, -1)"
        if r.kind == "split" and r.A != b.F7.one:
            return False, f"split row at ell = {r.ell} has A != 1"
    return True, f"{len(rows)} rows, 100% match, h = 3 vs oracle"


def criterion_trivial_character(b: Bundle) -> Tuple[bool, str]:
    chi1 = make_character(b.G, 1, b.F7)
    ev1 = PhiEvaluator(b.ctx7, b.F7, chi1)
    rows = attachment_table(b.ctx7, ev1, 100)
    two = b.F7.embed(2)
    for r in rows:
        if not r.match:
            return False, f"mismatch at ell = {r.ell}"
        if r.kind == "split" and r.a != two:
            return False, f"split row at ell = {r.ell} has a != 2"
        if r.kind == "inert" and r.a != b.F7.zero:
            return False, f"inert row at ell = {r.ell} has a != 0"
    return True, f"{len(rows)} rows, 100% match"


def criterion_char0(b: Bundle) -> Tuple[bool, str]:
    rows = attachment_table(b.ctx0, b.ev0, 20)
    for r in rows:
        if not r.match:
            return False, f"mismatch at ell = {r.ell}"
    ells = [r.ell for r in rows]
    if 7 not in ells or 13 not in ells:
        return False, f"inert 1/ell values not exercised; primes {ells}"
    return True, f"primes {ells}, 100% match"


def criterion_class_numbers(b: Bundle) -> Tuple[bool, str]:
    want = {2: 1, 3: 1, 5: 1, 229: 3}
    got = {}
    for d0, expected in want.items():
        K = QuadraticField(d0)
        h = class_group(K).h
        oracle = class_count_exhaustive(K)
        if h != oracle:
            return False, f"d0 = {d0}: class group gives {h}, oracle {oracle}"
        if h != expected:
            return False, f"d0 = {d0}: h = {h}, expected {expected}"
        got[d0] = h
    return True, f"{got}"


CRITERIA: List[Tuple[int, str, Callable[[Bundle], Tuple[bool, str]]]] = [
    (1, "local Laplacian eigen-equations", criterion_laplacian),
    (2, "psi closed form vs recursion", criterion_closed_form),
    (3, "summand index identities", criterion_summand_invariants),
    (4, "decomposition vs Laplacian route", criterion_dual_route),
    (5, "K_{S,q} invariance and theta scaling", criterion_invariance),
    (6, "headline attachment ell <= 100", criterion_headline_attach),
    (7, "trivial-character control", criterion_trivial_character),
    (8, "characteristic-0 attachment", criterion_char0),
    (9, "class-number oracle", criterion_class_numbers),
]


def run_all(
    seed: int = 0, emit: Optional[Callable[[str], None]] = print
) -> List[CriterionResult]:
    """Run the nine criteria in order, one result line each; a hard error
    inside a criterion is reported as its failure, never swallowed."""
    b = Bundle(seed)
    results = []
    for number, name, fn in CRITERIA:
        t0 = time.time()
        try:
            passed, detail = fn(b)
        except Exception as exc:
            passed, detail = False, f"error: {exc}"
        res = CriterionResult(number, name, passed, time.time() - t0, detail)
        results.append(res)
        if emit is not None:
            emit(res.line())
    return results
