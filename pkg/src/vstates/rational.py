"""Exact univariate polynomial and rational-function arithmetic over
``fractions.Fraction`` coefficients.

This backs the recursion for the spectrum's expansion functions, where the
recurrence must close exactly (coefficient growth overflows 64-bit integers
around the tenth iterate, so everything stays in arbitrary-precision
rationals).  Evaluation for numerics converts the coefficients to float once
and runs Horner.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class Polynomial:
    """Dense polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs", "_float_coeffs")

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._float_coeffs = None

    @property
    def degree(self) -> int:
        if self.coeffs == (Fraction(0),):
            return -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == -1

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(Fraction(-1))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        return Polynomial([a * c for a in self.coeffs])

    def derivative(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial([0])
        return Polynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "Polynomial"):
        """Exact Euclidean division (quotient, remainder)."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(1, len(rem) - len(other.coeffs) + 1)
        d = other.coeffs
        while len(rem) >= len(d) and any(c != 0 for c in rem):
            if rem[-1] == 0:
                rem.pop()
                continue
            k = len(rem) - len(d)
            c = rem[-1] / d[-1]
            q[k] = c
            for i, b in enumerate(d):
                rem[k + i] -= c * b
            rem.pop()
        return Polynomial(q), Polynomial(rem or [0])

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, other
        while not b.is_zero():
            _, r = a.divmod(b)
            a, b = b, r
        if a.is_zero():
            return Polynomial([1])
        return a.scale(1 / a.coeffs[-1])  # monic

    def __call__(self, x):
        if self._float_coeffs is None:
            self._float_coeffs = np.array([float(c) for c in self.coeffs])
        x = np.asarray(x, dtype=float)
        acc = np.full_like(x, self._float_coeffs[-1])
        for c in self._float_coeffs[-2::-1]:
            acc = acc * x + c
        return acc

    def eval_exact(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


class RationalFn:
    """Quotient of two :class:`Polynomial` values, kept in lowest terms with a
    monic denominator times an explicit rational constant absorbed into the
    numerator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial, reduce: bool = True):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce:
            g = num.gcd(den)
            if g.degree > 0:
                num, _ = num.divmod(g)
                den, _ = den.divmod(g)
        lead = den.coeffs[-1]
        if lead != 1:
            num = num.scale(1 / lead)
            den = den.scale(1 / lead)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFn":
        return cls(p, Polynomial([1]), reduce=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFn):
            return NotImplemented
        return (self.num * other.den).coeffs == (other.num * self.den).coeffs

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other: "RationalFn") -> "RationalFn":
        return RationalFn(self.num * other.den + other.num * self.den,
                          self.den * other.den)

    def __sub__(self, other: "RationalFn") -> "RationalFn":
        return RationalFn(self.num * other.den - other.num * self.den,
                          self.den * other.den)

    def __mul__(self, other: "RationalFn") -> "RationalFn":
        return RationalFn(self.num * other.num, self.den * other.den)

    def derivative(self) -> "RationalFn":
        num = self.num.derivative() * self.den - self.num * self.den.derivative()
        return RationalFn(num, self.den * self.den)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def eval_exact(self, x) -> Fraction:
        x = Fraction(x)
        return self.num.eval_exact(x) / self.den.eval_exact(x)

    def __repr__(self):
        return f"RationalFn({self.num!r}, {self.den!r})"


def poly_x() -> Polynomial:
    return Polynomial([0, 1])


def poly_const(c) -> Polynomial:
    return Polynomial([c])
