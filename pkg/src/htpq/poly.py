"""Sparse multivariate integer polynomials with exact rational evaluation.

A monomial is a sorted tuple of ``(variable_id, exponent)`` pairs; the empty tuple
is the constant monomial.  Text form is a sum of terms ``c*x<i>^<e>*...``::

    >>> p = IntPoly.parse("3*x0^2*x1^1 + -1")
    >>> str(p)
    '3*x0^2*x1^1 + -1'
"""

from __future__ import annotations

import re
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping, Union

Monomial = tuple[tuple[int, int], ...]
Number = Union[int, Fraction]

__all__ = ["IntPoly", "Monomial", "var", "const"]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps: dict[int, int] = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


class IntPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, int] | None = None) -> None:
        clean: dict[Monomial, int] = {}
        for mono, c in (terms or {}).items():
            if c == 0:
                continue
            exps: dict[int, int] = {}
            for v, e in mono:
                if v < 0 or e < 0:
                    raise ValueError(f"bad monomial {mono}")
                exps[int(v)] = exps.get(int(v), 0) + int(e)
            mono = tuple(sorted((v, e) for v, e in exps.items() if e != 0))
            clean[mono] = clean.get(mono, 0) + int(c)
        self.terms = {m: c for m, c in clean.items() if c != 0}

    # construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, c: int) -> "IntPoly":
        return cls({(): c})

    @classmethod
    def variable(cls, i: int) -> "IntPoly":
        return cls({((i, 1),): 1})

    @staticmethod
    def _coerce(other: object) -> "IntPoly":
        if isinstance(other, IntPoly):
            return other
        if isinstance(other, int):
            return IntPoly.constant(other)
        return NotImplemented  # type: ignore[return-value]

    # arithmetic ------------------------------------------------------------

    def __add__(self, other: object) -> "IntPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return IntPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "IntPoly":
        return IntPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: object) -> "IntPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: object) -> "IntPoly":
        return (-self) + other

    def __mul__(self, other: object) -> "IntPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Monomial, int] = defaultdict(int)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[_mono_mul(m1, m2)] += c1 * c2
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "IntPoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = IntPoly.constant(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = IntPoly.constant(other)
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # inspection ------------------------------------------------------------

    def variables(self) -> list[int]:
        return sorted({v for m in self.terms for v, _ in m})

    def coefficient(self, mono: Iterable[tuple[int, int]]) -> int:
        return self.terms.get(tuple(sorted(mono)), 0)

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def shift_variables(self, offset: int) -> "IntPoly":
        return IntPoly(
            {tuple((v + offset, e) for v, e in m): c for m, c in self.terms.items()}
        )

    def evaluate(self, point: Mapping[int, Number]) -> Fraction:
        """Exact value at ``point`` (variable id -> rational); missing ids are an error."""
        total = Fraction(0)
        for mono, c in self.terms.items():
            term = Fraction(c)
            for v, e in mono:
                term *= Fraction(point[v]) ** e
            total += term
        return total

    # text format -----------------------------------------------------------

    def _ordered(self) -> list[tuple[Monomial, int]]:
        return sorted(
            self.terms.items(),
            key=lambda mc: (-sum(e for _, e in mc[0]), mc[0]),
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self._ordered():
            parts.append("*".join([str(c)] + [f"x{v}^{e}" for v, e in mono]))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"IntPoly({str(self)!r})"

    _TERM = re.compile(r"^([+-]?\d*)((?:\*?x\d+(?:\^\d+)?)*)$")
    _FACTOR = re.compile(r"x(\d+)(?:\^(\d+))?")

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        """Parse the text format; also accepts '-' separators, implicit 1 / ^1 and X."""
        s = re.sub(r"\s+", "", text).replace("X", "x")
        if not s:
            raise ValueError("empty polynomial text")
        s = re.sub(r"(?<=[\dx^])-", "+-", s).replace("+-+", "+-").replace("++", "+")
        terms: dict[Monomial, int] = defaultdict(int)
        pieces = s.split("+")
        if pieces[0] == "":
            pieces = pieces[1:]
        for raw in pieces:
            m = cls._TERM.match(raw)
            if m is None:
                raise ValueError(f"cannot parse term {raw!r}")
            coef_txt, factors = m.groups()
            if coef_txt in ("", "+"):
                coef = 1
            elif coef_txt == "-":
                coef = -1
            else:
                coef = int(coef_txt)
            if not factors and coef_txt in ("", "+", "-"):
                raise ValueError(f"cannot parse term {raw!r}")
            if factors and not factors.startswith("*") and coef_txt not in ("", "+", "-"):
                raise ValueError(f"missing '*' in term {raw!r}")
            exps: dict[int, int] = defaultdict(int)
            for v, e in cls._FACTOR.findall(factors):
                exps[int(v)] += int(e) if e else 1
            terms[tuple(sorted(exps.items()))] += coef
        return cls(terms)


def var(i: int) -> IntPoly:
    return IntPoly.variable(i)


def const(c: int) -> IntPoly:
    return IntPoly.constant(c)
