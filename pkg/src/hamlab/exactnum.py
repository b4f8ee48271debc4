"""Exact scalar arithmetic for the rational mode of the normal-form engine.

Scalars live in Q(i)(w) where w is a root of the quadratic x^2 = p*x + q with
rational p, q.  With p = q = 0 this is just the complex rationals Q(i); with
p = q = 1 the generator is the golden ratio, with p = 0, q = 2 it is sqrt(2).
This is exactly the ground field needed to run Birkhoff normalization exactly
for frequency vectors such as (1,) or (1, golden): all homological divisors
stay inside the field, so no rounding ever occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class QuadField:
    """Quadratic extension Q(w) with w^2 = p*w + q; ``omega`` is the float value of w."""

    p: Fraction
    q: Fraction
    omega: float

    @property
    def trivial(self) -> bool:
        return self.p == 0 and self.q == 0


RATIONAL = QuadField(Fraction(0), Fraction(0), 0.0)
GOLDEN = QuadField(Fraction(1), Fraction(1), (1.0 + math.sqrt(5.0)) / 2.0)
SQRT2 = QuadField(Fraction(0), Fraction(2), math.sqrt(2.0))


class ExactComplex:
    """Element (ar + i*ai) + (br + i*bi) * w of Q(i)(w), with Fraction parts."""

    __slots__ = ("ar", "ai", "br", "bi", "field")

    def __init__(self, ar=0, ai=0, br=0, bi=0, field: QuadField = RATIONAL):
        self.ar = Fraction(ar)
        self.ai = Fraction(ai)
        self.br = Fraction(br)
        self.bi = Fraction(bi)
        self.field = field

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def i(field: QuadField = RATIONAL) -> "ExactComplex":
        return ExactComplex(0, 1, field=field)

    @staticmethod
    def omega(field: QuadField) -> "ExactComplex":
        return ExactComplex(0, 0, 1, 0, field=field)

    def _coerce(self, other):
        if isinstance(other, ExactComplex):
            if other.field == self.field:
                return other
            if other.field.trivial or (other.br == 0 and other.bi == 0):
                return ExactComplex(other.ar, other.ai, field=self.field)
            if self.field.trivial or (self.br == 0 and self.bi == 0):
                return other  # caller must then swap roles
            raise TypeError("cannot mix two distinct quadratic extensions")
        if isinstance(other, (int, Fraction)):
            return ExactComplex(other, field=self.field)
        return None

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.field != self.field:  # self was trivial, adopt o's field
            return o + self
        return ExactComplex(
            self.ar + o.ar, self.ai + o.ai, self.br + o.br, self.bi + o.bi, self.field
        )

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.ar, -self.ai, -self.br, -self.bi, self.field)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.field != self.field:
            return o * self
        f = self.field
        # complex products of the (a, b) parts
        a1r, a1i, b1r, b1i = self.ar, self.ai, self.br, self.bi
        a2r, a2i, b2r, b2i = o.ar, o.ai, o.br, o.bi
        # a1*a2
        aar = a1r * a2r - a1i * a2i
        aai = a1r * a2i + a1i * a2r
        # b1*b2
        bbr = b1r * b2r - b1i * b2i
        bbi = b1r * b2i + b1i * b2r
        # a1*b2 + b1*a2
        abr = a1r * b2r - a1i * b2i + b1r * a2r - b1i * a2i
        abi = a1r * b2i + a1i * b2r + b1r * a2i + b1i * a2r
        return ExactComplex(
            aar + f.q * bbr,
            aai + f.q * bbi,
            abr + f.p * bbr,
            abi + f.p * bbi,
            f,
        )

    __rmul__ = __mul__

    def _conj_omega(self) -> "ExactComplex":
        # w -> p - w, the Galois conjugate of the quadratic generator
        f = self.field
        return ExactComplex(
            self.ar + f.p * self.br,
            self.ai + f.p * self.bi,
            -self.br,
            -self.bi,
            f,
        )

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.field != self.field:
            return ExactComplex(self.ar, self.ai, field=o.field) / o
        # reduce to a complex-rational denominator via the Galois conjugate
        oc = o._conj_omega()
        num = self * oc
        den = o * oc  # br == bi == 0 by construction
        dr, di = den.ar, den.ai
        n2 = dr * dr + di * di
        if n2 == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex(
            (num.ar * dr + num.ai * di) / n2,
            (num.ai * dr - num.ar * di) / n2,
            (num.br * dr + num.bi * di) / n2,
            (num.bi * dr - num.br * di) / n2,
            self.field,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    # -- queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.ar == 0 and self.ai == 0 and self.br == 0 and self.bi == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ExactComplex)):
            o = self._coerce(other)
            if o is None:
                return NotImplemented
            if o.field != self.field:
                return o == self
            return (
                self.ar == o.ar
                and self.ai == o.ai
                and self.br == o.br
                and self.bi == o.bi
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.ar, self.ai, self.br, self.bi, self.field))

    def real_exact(self) -> "ExactComplex":
        return ExactComplex(self.ar, 0, self.br, 0, self.field)

    def imag_exact(self) -> "ExactComplex":
        return ExactComplex(self.ai, 0, self.bi, 0, self.field)

    def imag_is_zero(self) -> bool:
        return self.ai == 0 and self.bi == 0

    def to_complex(self) -> complex:
        w = self.field.omega
        return complex(
            float(self.ar) + float(self.br) * w, float(self.ai) + float(self.bi) * w
        )

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def __repr__(self):
        return f"ExactComplex({self.ar}, {self.ai}, {self.br}, {self.bi})"


def exact(value, field: QuadField = RATIONAL) -> ExactComplex:
    """Lift an int or Fraction into the exact complex field."""
    return ExactComplex(Fraction(value), field=field)
