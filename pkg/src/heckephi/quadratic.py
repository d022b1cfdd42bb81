"""Exact arithmetic in a real quadratic field K = Q(sqrt(d0)).

Ring of integers Z[omega], fundamental unit via the continued fraction of
sqrt(d0) with exact unit-index repair, prime splitting, prime ideals in HNF,
factorization of principal ideals, and Hensel-lifted ell-adic embeddings for
split primes. Elements are pairs of Fractions over the ordered basis
(omega, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt, lcm
from typing import Optional

import sympy


class QuadError(ValueError):
    pass


def _is_squarefree(n: int) -> bool:
    return n > 1 and all(e == 1 for e in sympy.factorint(n).values())


class KElement:
    """u + v*omega with exact rational u, v."""

    __slots__ = ("K", "u", "v")

    def __init__(self, K: "QuadraticField", u, v):
        self.K = K
        self.u = Fraction(u)
        self.v = Fraction(v)

    def __add__(self, other: "KElement") -> "KElement":
        return KElement(self.K, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "KElement") -> "KElement":
        return KElement(self.K, self.u - other.u, self.v - other.v)

    def __neg__(self) -> "KElement":
        return KElement(self.K, -self.u, -self.v)

    def __mul__(self, other: "KElement") -> "KElement":
        # omega^2 = t*omega - n
        t, n = self.K.t, self.K.n
        u1, v1, u2, v2 = self.u, self.v, other.u, other.v
        return KElement(
            self.K,
            u1 * u2 - n * v1 * v2,
            u1 * v2 + u2 * v1 + t * v1 * v2,
        )

    def __truediv__(self, other: "KElement") -> "KElement":
        nrm = other.norm()
        if nrm == 0:
            raise ZeroDivisionError("division by zero in K")
        conj = other.conjugate()
        num = self * conj
        return KElement(self.K, num.u / nrm, num.v / nrm)

    def __pow__(self, k: int) -> "KElement":
        if k < 0:
            return (self.K.one / self) ** (-k)
        out = self.K.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, q) -> "KElement":
        q = Fraction(q)
        return KElement(self.K, self.u * q, self.v * q)

    def conjugate(self) -> "KElement":
        return KElement(self.K, self.u + self.K.t * self.v, -self.v)

    def norm(self) -> Fraction:
        t, n = self.K.t, self.K.n
        return self.u * self.u + t * self.u * self.v + n * self.v * self.v

    def trace(self) -> Fraction:
        return 2 * self.u + self.K.t * self.v

    def is_rational(self) -> bool:
        return self.v == 0

    def is_integral(self) -> bool:
        return self.u.denominator == 1 and self.v.denominator == 1

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def sigma1(self) -> float:
        """Real embedding sending sqrt(d0) to the positive root."""
        return float(self.u) + float(self.v) * self.K.omega_real

    def sigma2(self) -> float:
        return float(self.u) + float(self.v) * self.K.omega_conj_real

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KElement)
            and self.K.d0 == other.K.d0
            and self.u == other.u
            and self.v == other.v
        )

    def __hash__(self) -> int:
        return hash((self.K.d0, self.u, self.v))

    def __repr__(self) -> str:
        return f"({self.u} + {self.v}*w)"


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime of K above ell, in HNF generator form.

    kind is one of split_first, split_second, inert, ramified; for the two
    split primes, root is the distinguishing root of x^2 - t x + n mod ell,
    and split_first carries the least nonnegative root.
    """

    ell: int
    kind: str
    root: Optional[int] = None

    @property
    def norm(self) -> int:
        return self.ell * self.ell if self.kind == "inert" else self.ell

    def conjugate(self) -> "PrimeIdeal":
        if self.kind == "split_first":
            return PrimeIdeal(self.ell, "split_second", self.root)
        if self.kind == "split_second":
            return PrimeIdeal(self.ell, "split_first", self.root)
        return self

    def hnf_columns(self, K: "QuadraticField"):
        """Canonical column HNF [[a, 0], [b, c]]: basis (a*omega + b, c)."""
        if self.kind == "inert":
            return (Fraction(self.ell), Fraction(0), Fraction(self.ell))
        r = self.own_root(K)
        return (Fraction(1), Fraction((-r) % self.ell), Fraction(self.ell))

    def own_root(self, K: "QuadraticField") -> int:
        """The root r with the ideal generated by (ell, omega - r)."""
        if self.kind == "split_first":
            return self.root
        if self.kind == "split_second":
            return (K.t - self.root) % self.ell
        if self.kind == "ramified":
            return self.root
        raise QuadError("inert primes carry no root")

    def label(self) -> str:
        if self.kind == "split_first":
            return f"lam{self.ell}"
        if self.kind == "split_second":
            return f"lam{self.ell}'"
        if self.kind == "ramified":
            return f"ram{self.ell}"
        return f"({self.ell})"


FracIdealFactorization = list  # of (PrimeIdeal, int) pairs


class QuadraticField:
    """K = Q(sqrt(d0)) with O = Z[omega] and a fundamental unit."""

    def __init__(self, d0: int):
        if not _is_squarefree(d0):
            raise QuadError(f"d0 must be squarefree and > 1, got {d0}")
        self.d0 = d0
        if d0 % 4 == 1:
            self.d = d0
            self.t = 1
            self.n = (1 - d0) // 4
        else:
            self.d = 4 * d0
            self.t = 0
            self.n = -d0
        self.omega_real = (self.t + d0 ** 0.5) / 2 if self.t else d0 ** 0.5
        self.omega_conj_real = (self.t - d0 ** 0.5) / 2 if self.t else -(d0 ** 0.5)
        self._eps: Optional[KElement] = None

    def elem(self, u, v=0) -> KElement:
        return KElement(self, u, v)

    @property
    def one(self) -> KElement:
        return KElement(self, 1, 0)

    @property
    def omega(self) -> KElement:
        return KElement(self, 0, 1)

    @property
    def epsilon(self) -> KElement:
        if self._eps is None:
            self._eps = fundamental_unit(self.d0, self)
        return self._eps

    @property
    def minkowski_bound(self) -> int:
        return isqrt(self.d) // 2

    def __repr__(self) -> str:
        return f"QuadraticField({self.d0})"


def splitting_type(K: QuadraticField, ell: int) -> str:
    """split / inert / ramified, matching the Kronecker symbol (d | ell)."""
    d = K.d
    if d % ell == 0:
        return "ramified"
    if ell == 2:
        return "split" if d % 8 == 1 else "inert"
    s = sympy.jacobi_symbol(d, ell)
    return "split" if s == 1 else "inert"


def theta(K: QuadraticField, ell: int) -> int:
    """The quadratic character cutting out K, on a prime: +1/-1/0."""
    kind = splitting_type(K, ell)
    return 1 if kind == "split" else (-1 if kind == "inert" else 0)


def theta_rational(K: QuadraticField, r) -> int:
    """theta on a nonzero rational coprime to d; theta(-1) = +1 (K real)."""
    r = Fraction(r)
    if r == 0:
        raise QuadError("theta of zero")
    out = 1
    for m in (abs(r.numerator), r.denominator):
        for ell, e in sympy.factorint(m).items():
            te = theta(K, ell)
            if te == 0:
                raise QuadError(f"theta undefined: {ell} ramifies in K")
            if e % 2 and te < 0:
                out = -out
    return out


def prime_ideals_above(K: QuadraticField, ell: int) -> list:
    kind = splitting_type(K, ell)
    if kind == "inert":
        return [PrimeIdeal(ell, "inert")]
    if kind == "ramified":
        if ell == 2:
            r = K.n % 2  # double root of x^2 - d0 mod 2
        else:
            r = (K.t * pow(2, -1, ell)) % ell
        return [PrimeIdeal(ell, "ramified", r)]
    r0, _ = _split_roots_mod_ell(K.t, K.n, ell)
    return [PrimeIdeal(ell, "split_first", r0), PrimeIdeal(ell, "split_second", r0)]


@lru_cache(maxsize=None)
def _split_roots_mod_ell(t: int, n: int, ell: int):
    """Both roots of x^2 - t x + n mod ell, least one first."""
    roots = sorted(x for x in range(ell) if (x * x - t * x + n) % ell == 0)
    if len(roots) != 2:
        raise QuadError(f"{ell} is not split")
    return roots[0], roots[1]


@lru_cache(maxsize=None)
def _hensel_cache(t: int, n: int, ell: int, prec: int):
    r0, _ = _split_roots_mod_ell(t, n, ell)
    mod = ell
    r = r0
    while mod < ell ** prec:
        mod = min(mod * mod, ell ** prec)
        fr = (r * r - t * r + n) % mod
        fpr = (2 * r - t) % mod
        r = (r - fr * pow(fpr, -1, mod)) % mod
    assert (r * r - t * r + n) % (ell ** prec) == 0
    assert r % ell == r0
    rp = (t - r) % (ell ** prec)
    return r, rp


def hensel_roots(K: QuadraticField, ell: int, precision: int):
    """Distinct lifted roots (r, r') of x^2 - t x + n mod ell^precision.

    r reduces to the least nonnegative root mod ell, fixing which embedding
    belongs to the first split prime.
    """
    if splitting_type(K, ell) != "split":
        raise QuadError(f"{ell} is not split in K")
    return _hensel_cache(K.t, K.n, ell, precision)


def _val(m: int, ell: int) -> int:
    if m == 0:
        raise QuadError("valuation of zero")
    v = 0
    while m % ell == 0:
        m //= ell
        v += 1
    return v


def factor_principal(K: QuadraticField, a: KElement) -> FracIdealFactorization:
    """Prime factorization of the principal fractional ideal (a)."""
    if a.is_zero():
        raise QuadError("cannot factor the zero ideal")
    den = lcm(a.u.denominator, a.v.denominator)
    A = a.scale(den)  # integral now
    exps: dict = {}

    def bump(P: PrimeIdeal, e: int):
        if e:
            exps[P] = exps.get(P, 0) + e

    nA = A.norm()
    assert nA.denominator == 1
    nA_int = abs(int(nA))
    for ell, vN in sympy.factorint(nA_int).items():
        kind = splitting_type(K, ell)
        if kind == "inert":
            if vN % 2:
                raise QuadError("odd inert valuation in an integral norm")
            bump(PrimeIdeal(ell, "inert"), vN // 2)
        elif kind == "ramified":
            bump(prime_ideals_above(K, ell)[0], vN)
        else:
            lam, lamc = prime_ideals_above(K, ell)
            r, _ = hensel_roots(K, ell, vN + 2)
            # v_lambda(A) <= vN, so the truncated embedding has the exact
            # valuation: the truncation error sits at vN + 2.
            emb = int(A.u) + int(A.v) * r
            e1 = _val(emb, ell) if emb % ell == 0 else 0
            if e1 > vN:
                raise QuadError("split valuation exceeded the norm budget")
            bump(lam, e1)
            bump(lamc, vN - e1)
    for ell, e in sympy.factorint(int(den)).items():
        kind = splitting_type(K, ell)
        if kind == "inert":
            bump(PrimeIdeal(ell, "inert"), -e)
        elif kind == "ramified":
            bump(prime_ideals_above(K, ell)[0], -2 * e)
        else:
            lam, lamc = prime_ideals_above(K, ell)
            bump(lam, -e)
            bump(lamc, -e)
    out = [(P, e) for P, e in exps.items() if e]
    out.sort(key=lambda pe: (pe[0].ell, pe[0].kind))
    return out


def factorization_norm(fac: FracIdealFactorization) -> Fraction:
    out = Fraction(1)
    for P, e in fac:
        out *= Fraction(P.norm) ** e
    return out


def q_star_of_factorization(fac: FracIdealFactorization) -> int:
    """(-1)^(sum of inert exponents); the inert-parity character."""
    s = sum(e for P, e in fac if P.kind == "inert")
    return -1 if s % 2 else 1


def r_omega_matrix(a: KElement):
    """Regular representation in basis (omega, 1): rows are the coordinates
    of a*omega and a*1, so r(a) . (omega, 1)^T = (a*omega, a)^T."""
    t, n = a.K.t, a.K.n
    u, v = a.u, a.v
    return ((u + t * v, -n * v), (v, u))


def mult_matrix(a: KElement):
    """Action of multiplication by a on coordinate columns (transpose of
    r_omega_matrix)."""
    t, n = a.K.t, a.K.n
    u, v = a.u, a.v
    return ((u + t * v, v), (-n * v, u))


def _cf_pell(d0: int):
    """Fundamental solution of x^2 - d0 y^2 = +-1 via the continued fraction
    of sqrt(d0)."""
    a0 = isqrt(d0)
    if a0 * a0 == d0:
        raise QuadError("d0 is a square")
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    P, Q = a0, d0 - a0 * a0
    while True:
        if p * p - d0 * q * q in (1, -1):
            return p, q
        a = (a0 + P) // Q
        P_next = a * Q - P
        Q_next = (d0 - P_next * P_next) // Q
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        P, Q = P_next, Q_next


def fundamental_unit(d0: int, K: Optional[QuadraticField] = None) -> KElement:
    """Fundamental unit of Z[omega], normalized so sigma1(eps) > 1.

    The continued fraction of sqrt(d0) yields the fundamental unit u0 of
    Z[sqrt(d0)]; for d0 = 1 mod 4 the unit index [O^x : Z[sqrt d0]^x] is 1
    or 3, and the exact integer cube root (when it exists) is recovered from
    t^3 - 3 N(u0) t = tr(u0).
    """
    if K is None:
        K = QuadraticField(d0)
    p, q = _cf_pell(d0)
    if K.t == 0:
        return KElement(K, p, q)  # omega = sqrt(d0)
    # omega = (1 + sqrt d0)/2, sqrt d0 = 2 omega - 1
    u0 = KElement(K, p - q, 2 * q)
    s = int(u0.norm())
    tr = int(u0.trace())
    tmax = round(abs(tr) ** (1.0 / 3)) + 2
    for tt in range(1, tmax + 1):
        if tt ** 3 - 3 * s * tt == tr:
            ff2, rem = divmod(tt * tt - 4 * s, d0)
            if rem == 0 and ff2 >= 0:
                ff = isqrt(ff2)
                if ff * ff == ff2 and (tt - ff) % 2 == 0:
                    eps = KElement(K, (tt - ff) // 2, ff)
                    if (eps ** 3) == u0:
                        return eps
    return u0
