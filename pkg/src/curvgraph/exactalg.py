"""Exact scalars and sparse row reduction.

Rationals are :class:`fractions.Fraction`.  On top of them live univariate
polynomials in a formal dimension ``m`` (:class:`PolyM`), rational
functions of ``m`` (:class:`RatFuncM`) and polynomials in a formal scalar
curvature symbol ``kappa`` with rational-function coefficients
(:class:`KappaPoly`).  Every value is immutable and normalized, so ``==``
is structural equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

Rat = Fraction
Number = Union[int, Fraction]

__all__ = [
    "Rat", "rat", "rat_arith", "PolyM", "RatFuncM", "KappaPoly",
    "Echelon", "echelon", "reduce_against", "ExactError",
]


class ExactError(ArithmeticError):
    """Raised for undefined exact operations (division by zero and friends)."""


def rat(x) -> Fraction:
    """Coerce ints, strings like ``'-5/432'`` and Fractions to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    return Fraction(x)


def rat_arith(a, b, op: str) -> Fraction:
    a, b = rat(a), rat(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ExactError("division by zero")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# polynomials in m

class PolyM:
    """Polynomial in the formal variable ``m`` with rational coefficients.

    ``coeffs[k]`` is the coefficient of ``m**k``; trailing zeros are stripped,
    so the zero polynomial has ``coeffs == ()`` and ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("PolyM is immutable")

    @classmethod
    def m(cls) -> "PolyM":
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> "PolyM":
        return cls((c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @staticmethod
    def _lift(x) -> "PolyM":
        if isinstance(x, PolyM):
            return x
        if isinstance(x, (int, Fraction)):
            return PolyM((x,))
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        n = max(len(a), len(b))
        return PolyM((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                     for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PolyM(-c for c in self.coeffs)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return PolyM()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return PolyM(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyM((1,))
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "PolyM") -> Tuple["PolyM", "PolyM"]:
        if other.is_zero():
            raise ExactError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.lead()
        d = other.degree
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k] / lead
            if c:
                q[k - d] = c
                for j, y in enumerate(other.coeffs):
                    rem[k - d + j] -= c * y
        return PolyM(q), PolyM(rem)

    def monic(self) -> "PolyM":
        if self.is_zero():
            return self
        return self * (1 / self.lead())

    @staticmethod
    def gcd(a: "PolyM", b: "PolyM") -> "PolyM":
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, PolyM) else other
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(("PolyM", self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"PolyM({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("m" if k == 1 else f"m^{k}")
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                body = mono
            elif mono:
                body = f"{_fmt_rat(a)}*{mono}"
            else:
                body = _fmt_rat(a)
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f"{sign}{body}"
        return s


class RatFuncM:
    """Reduced quotient of two :class:`PolyM` with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = PolyM._lift(num)
        den = PolyM((1,)) if den is None else PolyM._lift(den)
        if num is NotImplemented or den is NotImplemented:
            raise TypeError("RatFuncM needs polynomial parts")
        if den.is_zero():
            raise ExactError("zero denominator")
        if num.is_zero():
            den = PolyM((1,))
        else:
            g = PolyM.gcd(num, den)
            if g.degree > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
            lead = den.lead()
            num, den = num * (1 / lead), den * (1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFuncM is immutable")

    @classmethod
    def m(cls):
        return cls(PolyM.m())

    @staticmethod
    def _lift(x):
        if isinstance(x, RatFuncM):
            return x
        if isinstance(x, (int, Fraction, PolyM)):
            return RatFuncM(x)
        return NotImplemented

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        if self.den == o.den:
            return RatFuncM(self.num + o.num, self.den)
        return RatFuncM(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFuncM(-self.num, self.den)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return RatFuncM(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero():
            raise ExactError("division by zero rational function")
        return RatFuncM(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatFuncM(1) / (self ** (-k))
        return RatFuncM(self.num ** k, self.den ** k)

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise ExactError(f"pole at m={x}")
        n = self.num(x)
        if isinstance(n, (int, Fraction)) and isinstance(d, (int, Fraction)):
            return Fraction(n) / d
        return n / d

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash(("RatFuncM", self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"RatFuncM({self})"

    def __str__(self):
        if self.den == PolyM((1,)):
            return str(self.num)
        return f"({self.num})/({self.den})"


class KappaPoly:
    """Polynomial in the symbol ``kappa``; coefficients are :class:`RatFuncM`."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [RatFuncM._lift(c) for c in coeffs]
        if any(c is NotImplemented for c in cs):
            raise TypeError("bad KappaPoly coefficient")
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("KappaPoly is immutable")

    @classmethod
    def kappa(cls):
        return cls((0, 1))

    @classmethod
    def monomial(cls, coeff, power: int):
        return cls([0] * power + [coeff])

    def coeff(self, k: int) -> RatFuncM:
        return self.coeffs[k] if k < len(self.coeffs) else RatFuncM(0)

    def is_zero(self):
        return not self.coeffs

    @staticmethod
    def _lift(x):
        if isinstance(x, KappaPoly):
            return x
        if isinstance(x, (int, Fraction, PolyM, RatFuncM)):
            return KappaPoly((x,))
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return KappaPoly(self.coeff(i) + o.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return KappaPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return KappaPoly()
        out = [RatFuncM(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(o.coeffs):
                out[i + j] = out[i + j] + x * y
        return KappaPoly(out)

    __rmul__ = __mul__

    def __call__(self, m, kappa):
        """Numeric value at given ``m`` and ``kappa``."""
        return sum(c(m) * kappa ** k for k, c in enumerate(self.coeffs))

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(("KappaPoly", self.coeffs))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"KappaPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            mono = "" if k == 0 else ("kappa" if k == 1 else f"kappa^{k}")
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# sparse elimination

SparseRow = Dict[int, Fraction]


class Echelon:
    """Reduced row echelon basis of a row span.

    ``basis[i]`` has a leading 1 at column ``pivots[i]`` and zeros at every
    other pivot column.  Rows are kept sorted by pivot.
    """

    def __init__(self, width: int):
        self.width = width
        self._rows: Dict[int, SparseRow] = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[int]:
        return sorted(self._rows)

    @property
    def basis(self) -> List[SparseRow]:
        return [dict(self._rows[p]) for p in self.pivots]

    def reduce(self, v: Mapping[int, Fraction]) -> SparseRow:
        out = {k: rat(x) for k, x in v.items() if x}
        for k in out:
            if not 0 <= k < self.width:
                raise ValueError(f"column {k} outside width {self.width}")
        for p in sorted(set(out) & set(self._rows)):
            c = out.get(p)
            if not c:
                continue
            for k, x in self._rows[p].items():
                y = out.get(k, 0) - c * x
                if y:
                    out[k] = y
                else:
                    out.pop(k, None)
        return out

    def add(self, v: Mapping[int, Fraction]) -> bool:
        """Insert a row; returns True when it raised the rank."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        inv = 1 / r[p]
        r = {k: x * inv for k, x in r.items()}
        for q, row in self._rows.items():
            c = row.get(p)
            if c:
                for k, x in r.items():
                    y = row.get(k, 0) - c * x
                    if y:
                        row[k] = y
                    else:
                        row.pop(k, None)
        self._rows[p] = r
        return True


def echelon(rows: Sequence[Mapping[int, Fraction]], width: int) -> Echelon:
    """Row-reduce ``rows``; the first row to reach a pivot column keeps it."""
    e = Echelon(width)
    for r in rows:
        e.add(r)
    return e


def reduce_against(basis: Echelon, v: Mapping[int, Fraction], width: int = None) -> SparseRow:
    if width is not None and width != basis.width:
        raise ValueError(f"width mismatch: {width} != {basis.width}")
    return basis.reduce(v)
