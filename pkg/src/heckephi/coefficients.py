"""Coefficient fields for all downstream arithmetic.

Two modes behind one interface: a prime field F_p with p an odd prime, and
the cyclotomic rationals Q(zeta_n) for odd n, represented exactly as
polynomials over Fraction reduced modulo the n-th cyclotomic polynomial.
Everything downstream is field-agnostic; values are immutable and hashable.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Union

import sympy


class CoeffError(ValueError):
    """Configuration-level failure: bad mode, missing root, zero division."""


class FieldElement:
    """Base class; concrete elements live in FpElement or CycElement."""

    field: "CoeffField"

    def __add__(self, other):  # pragma: no cover - interface
        raise NotImplementedError

    def inverse(self) -> "FieldElement":  # pragma: no cover - interface
        raise NotImplementedError

    def is_zero(self) -> bool:  # pragma: no cover - interface
        raise NotImplementedError

    def __sub__(self, other):
        return self + (-other)

    def __pow__(self, k: int) -> "FieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


class FpElement(FieldElement):
    __slots__ = ("field", "r")

    def __init__(self, field: "PrimeField", r: int):
        self.field = field
        self.r = r % field.p

    def __add__(self, other: "FpElement") -> "FpElement":
        return FpElement(self.field, self.r + other.r)

    def __neg__(self) -> "FpElement":
        return FpElement(self.field, -self.r)

    def __mul__(self, other: "FpElement") -> "FpElement":
        return FpElement(self.field, self.r * other.r)

    def inverse(self) -> "FpElement":
        if self.r == 0:
            raise CoeffError("division by zero in F_%d" % self.field.p)
        return FpElement(self.field, pow(self.r, -1, self.field.p))

    def is_zero(self) -> bool:
        return self.r == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FpElement)
            and self.field.p == other.field.p
            and self.r == other.r
        )

    def __hash__(self) -> int:
        return hash(("Fp", self.field.p, self.r))

    def __repr__(self) -> str:
        return f"{self.r}"


class CycElement(FieldElement):
    """Element of Q(zeta_n): coefficient tuple of length deg(Phi_n)."""

    __slots__ = ("field", "c")

    def __init__(self, field: "CyclotomicField", coeffs):
        self.field = field
        c = list(coeffs)
        if len(c) != field.degree:
            raise CoeffError("coefficient vector has wrong length")
        self.c = tuple(Fraction(x) for x in c)

    def __add__(self, other: "CycElement") -> "CycElement":
        return CycElement(self.field, [a + b for a, b in zip(self.c, other.c)])

    def __neg__(self) -> "CycElement":
        return CycElement(self.field, [-a for a in self.c])

    def __mul__(self, other: "CycElement") -> "CycElement":
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    if b:
                        prod[i + j] += a * b
        return CycElement(self.field, self.field.reduce(prod))

    def inverse(self) -> "CycElement":
        if self.is_zero():
            raise CoeffError("division by zero in Q(zeta_%d)" % self.field.n)
        inv = _poly_invmod(list(self.c), self.field.modulus)
        inv += [Fraction(0)] * (self.field.degree - len(inv))
        return CycElement(self.field, inv[: self.field.degree])

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.c)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CycElement)
            and self.field.n == other.field.n
            and self.c == other.c
        )

    def __hash__(self) -> int:
        return hash(("cyc", self.field.n, self.c))

    def __repr__(self) -> str:
        parts = []
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            if i == 0:
                parts.append(str(a))
            elif i == 1:
                parts.append(f"{a}*z" if a != 1 else "z")
            else:
                parts.append(f"{a}*z^{i}" if a != 1 else f"z^{i}")
        return " + ".join(parts) if parts else "0"


def _poly_divmod(num, den):
    num = num[:]
    den = den[:]
    while den and den[-1] == 0:
        den.pop()
    q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        while num and num[-1] == 0:
            num.pop()
        if len(num) < len(den):
            break
        k = len(num) - len(den)
        f = num[-1] / den[-1]
        q[k] = f
        for i, d in enumerate(den):
            num[i + k] -= f * d
    while num and num[-1] == 0:
        num.pop()
    return q, num


def _poly_invmod(a, mod):
    """Inverse of a modulo the polynomial mod over Q, by extended Euclid."""
    r0, r1 = mod[:], a[:]
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while any(r1):
        q, r = _poly_divmod(r0, r1)
        qs1 = [Fraction(0)] * (len(q) + len(s1) - 1)
        for i, qq in enumerate(q):
            if qq:
                for j, ss in enumerate(s1):
                    qs1[i + j] += qq * ss
        s = [Fraction(0)] * max(len(s0), len(qs1))
        for i in range(len(s)):
            v = s0[i] if i < len(s0) else Fraction(0)
            w = qs1[i] if i < len(qs1) else Fraction(0)
            s[i] = v - w
        r0, r1 = r1, r
        s0, s1 = s1, s
    while r0 and r0[-1] == 0:
        r0.pop()
    if len(r0) != 1:
        raise CoeffError("element is not invertible modulo the cyclotomic polynomial")
    lead = r0[0]
    return [x / lead for x in s0]


class CoeffField:
    """Common interface of the two coefficient-field modes."""

    spec: str

    @property
    def zero(self) -> FieldElement:  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def one(self) -> FieldElement:  # pragma: no cover - interface
        raise NotImplementedError

    def embed(self, m: int) -> FieldElement:  # pragma: no cover - interface
        raise NotImplementedError

    def embed_fraction(self, q: Fraction) -> FieldElement:
        q = Fraction(q)
        return self.embed(q.numerator) * self.embed(q.denominator).inverse()

    @property
    def characteristic(self) -> int:
        raise NotImplementedError


class PrimeField(CoeffField):
    def __init__(self, p: int):
        if p < 3 or not sympy.isprime(p):
            raise CoeffError(f"prime-field mode needs an odd prime, got {p}")
        self.p = p
        self.spec = f"Fp:{p}"

    @cached_property
    def zero(self) -> FpElement:
        return FpElement(self, 0)

    @cached_property
    def one(self) -> FpElement:
        return FpElement(self, 1)

    def embed(self, m: int) -> FpElement:
        return FpElement(self, m)

    @property
    def characteristic(self) -> int:
        return self.p

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


class CyclotomicField(CoeffField):
    """Q(zeta_n) with zeta_n represented by the class of x mod Phi_n."""

    def __init__(self, n: int):
        if n < 1 or n % 2 == 0:
            raise CoeffError(f"cyclotomic mode needs odd n >= 1, got {n}")
        self.n = n
        self.spec = f"cyclotomic:{n}"
        poly = sympy.cyclotomic_poly(n, sympy.Symbol("x"))
        coeffs = sympy.Poly(poly, sympy.Symbol("x")).all_coeffs()
        # ascending order, monic by construction
        self.modulus = [Fraction(int(c)) for c in reversed(coeffs)]
        self.degree = len(self.modulus) - 1

    def reduce(self, coeffs) -> list:
        """Reduce an ascending coefficient list modulo Phi_n."""
        c = [Fraction(x) for x in coeffs]
        for k in range(len(c) - 1, self.degree - 1, -1):
            f = c[k]
            if f:
                for i in range(self.degree + 1):
                    c[k - self.degree + i] -= f * self.modulus[i]
        return c[: self.degree] + [Fraction(0)] * max(0, self.degree - len(c))

    @cached_property
    def zero(self) -> CycElement:
        return CycElement(self, [Fraction(0)] * self.degree)

    @cached_property
    def one(self) -> CycElement:
        return CycElement(self, [Fraction(1)] + [Fraction(0)] * (self.degree - 1))

    @cached_property
    def zeta(self) -> CycElement:
        if self.degree == 1:
            # n = 1: zeta = 1
            return self.one
        c = [Fraction(0)] * self.degree
        c[1] = Fraction(1)
        return CycElement(self, c)

    def embed(self, m: int) -> CycElement:
        return CycElement(self, [Fraction(m)] + [Fraction(0)] * (self.degree - 1))

    @property
    def characteristic(self) -> int:
        return 0

    def __repr__(self) -> str:
        return f"CyclotomicField({self.n})"


@lru_cache(maxsize=None)
def coeff_field(spec: str) -> CoeffField:
    """Parse a field specification string: "Fp:7" or "cyclotomic:3"."""
    mode, _, arg = spec.partition(":")
    if not arg:
        raise CoeffError(f"malformed field spec {spec!r}")
    try:
        k = int(arg)
    except ValueError as exc:
        raise CoeffError(f"malformed field spec {spec!r}") from exc
    if mode == "Fp":
        return PrimeField(k)
    if mode == "cyclotomic":
        return CyclotomicField(k)
    raise CoeffError(f"unknown coefficient mode {mode!r}")


def make_root_of_unity(F: CoeffField, n: int) -> FieldElement:
    """A primitive n-th root of unity in F; least residue in prime fields.

    Raises CoeffError when F_p has no such root (n must divide p - 1) or when
    the cyclotomic field's n does not match.
    """
    if n == 1:
        return F.one
    if isinstance(F, PrimeField):
        if (F.p - 1) % n != 0:
            raise CoeffError(f"no primitive {n}-th root of unity in F_{F.p}")
        for r in range(2, F.p):
            z = FpElement(F, r)
            if (z ** n) == F.one and all((z ** k) != F.one for k in range(1, n)):
                return z
        raise CoeffError(f"no primitive {n}-th root of unity in F_{F.p}")
    if isinstance(F, CyclotomicField):
        if F.n % n != 0:
            raise CoeffError(f"Q(zeta_{F.n}) holds no primitive {n}-th root of unity")
        return F.zeta ** (F.n // n)
    raise CoeffError("unsupported coefficient field")


def embed_integer(F: CoeffField, m: int) -> FieldElement:
    return F.embed(m)


ElementLike = Union[FpElement, CycElement]
