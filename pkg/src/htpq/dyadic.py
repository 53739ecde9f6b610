"""Exact dyadic rationals n / 2^k, kept in lowest terms."""

from __future__ import annotations

import functools
from fractions import Fraction
from typing import Union

__all__ = ["Dyadic"]

Rational = Union[int, Fraction, "Dyadic"]


@functools.total_ordering
class Dyadic:
    """num / 2^exp with num odd, or num = exp = 0."""

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0) -> None:
        if exp < 0:
            num, exp = num << -exp, 0
        if num == 0:
            exp = 0
        else:
            tz = (num & -num).bit_length() - 1
            shift = min(tz, exp)
            num >>= shift
            exp -= shift
        self.num = num
        self.exp = exp

    @classmethod
    def from_fraction(cls, r: Fraction | int) -> "Dyadic":
        r = Fraction(r)
        d = r.denominator
        if d & (d - 1):
            raise ValueError(f"{r} is not dyadic")
        return cls(r.numerator, d.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Inverse of ``str``: "num/2^exp" or an integer."""
        text = text.strip()
        if "/" not in text:
            return cls(int(text))
        num, den = text.split("/")
        if not den.startswith("2^"):
            raise ValueError(f"not a dyadic literal: {text!r}")
        return cls(int(num), int(den[2:]))

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def scaled(self, n: int) -> "Dyadic":
        """self * 2^-n."""
        return Dyadic(self.num, self.exp + n)

    def __add__(self, other: Rational) -> "Dyadic":
        o = other if isinstance(other, Dyadic) else Dyadic.from_fraction(Fraction(other))
        e = max(self.exp, o.exp)
        return Dyadic((self.num << (e - self.exp)) + (o.num << (e - o.exp)), e)

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __sub__(self, other: Rational) -> "Dyadic":
        o = other if isinstance(other, Dyadic) else Dyadic.from_fraction(Fraction(other))
        return self + (-o)

    def __rsub__(self, other: Rational) -> "Dyadic":
        return (-self) + other

    def __mul__(self, other: Rational) -> "Dyadic":
        o = other if isinstance(other, Dyadic) else Dyadic.from_fraction(Fraction(other))
        return Dyadic(self.num * o.num, self.exp + o.exp)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Dyadic):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other: Rational) -> bool:
        if isinstance(other, Dyadic):
            e = max(self.exp, other.exp)
            return (self.num << (e - self.exp)) < (other.num << (e - other.exp))
        if isinstance(other, (int, Fraction)):
            # cross-multiplication: num / 2^exp < a / b  iff  num * b < a * 2^exp
            o = Fraction(other)
            return self.num * o.denominator < o.numerator << self.exp
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"Dyadic({self.num}, {self.exp})"
