"""Exact arithmetic in the real field Q(sqrt2, sqrt3) and Lorentzian linear algebra.

Every number is stored as ``a + b*r2 + c*r3 + d*r6`` with rational
coordinates, where ``r2 = sqrt(2)``, ``r3 = sqrt(3)`` and ``r6 = sqrt(6)``.
The four basis elements are linearly independent over Q, so the
representation is unique and equality is coordinate-wise.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

from gmpy2 import mpq

# gmpy2 rationals: always reduced, positive denominator, C-speed arithmetic
Rational = type(mpq())
_RATIONALS = (int, Fraction, Rational)
Number = Union[int, Fraction, Rational, "FieldElement"]

__all__ = [
    "Rational",
    "FieldElement",
    "ZERO",
    "ONE",
    "R2",
    "R3",
    "R6",
    "T",
    "field_arith",
    "sign",
    "parse_field",
    "LorentzVector",
    "Isometry",
    "MINKOWSKI_J",
    "minkowski_inner",
    "solve_linear",
]


class FieldElement:
    """An element ``a + b*sqrt2 + c*sqrt3 + d*sqrt6`` with rational coordinates."""

    __slots__ = ("a", "b", "c", "d", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0):
        self.a = mpq(a)
        self.b = mpq(b)
        self.c = mpq(c)
        self.d = mpq(d)
        self._hash = None

    @classmethod
    def coerce(cls, x: Number) -> FieldElement:
        if isinstance(x, FieldElement):
            return x
        if isinstance(x, _RATIONALS):
            return cls(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to FieldElement")

    @property
    def coords(self) -> tuple[Rational, Rational, Rational, Rational]:
        return (self.a, self.b, self.c, self.d)

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, _RATIONALS):
            other = FieldElement(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coords)
        return self._hash

    def __repr__(self) -> str:
        return f"FieldElement({format_field(self)!r})"

    def __str__(self) -> str:
        return format_field(self)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other: Number) -> FieldElement:
        try:
            o = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return FieldElement(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __sub__(self, other: Number) -> FieldElement:
        try:
            o = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return FieldElement(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __rsub__(self, other: Number) -> FieldElement:
        return FieldElement.coerce(other) - self

    def __mul__(self, other: Number) -> FieldElement:
        if isinstance(other, _RATIONALS):
            return FieldElement(self.a * other, self.b * other, self.c * other, self.d * other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return FieldElement(
            a * e + 2 * b * f + 3 * c * g + 6 * d * h,
            a * f + b * e + 3 * (c * h + d * g),
            a * g + c * e + 2 * (b * h + d * f),
            a * h + d * e + b * g + c * f,
        )

    __rmul__ = __mul__

    def conj2(self) -> FieldElement:
        """Galois conjugate sending sqrt2 to -sqrt2."""
        return FieldElement(self.a, -self.b, self.c, -self.d)

    def conj3(self) -> FieldElement:
        """Galois conjugate sending sqrt3 to -sqrt3."""
        return FieldElement(self.a, self.b, -self.c, -self.d)

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(sqrt2, sqrt3)")
        y = self * self.conj2()  # lies in Q(sqrt3)
        norm = y * y.conj3()  # rational
        return self.conj2() * y.conj3() * (1 / norm.a)

    def __truediv__(self, other: Number) -> FieldElement:
        if isinstance(other, _RATIONALS):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt2, sqrt3)")
            return self * (1 / mpq(other))
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Number) -> FieldElement:
        return FieldElement.coerce(other) * self.inverse()

    def sign(self) -> int:
        return sign(self)

    def __lt__(self, other: Number) -> bool:
        return sign(self - other) < 0

    def __le__(self, other: Number) -> bool:
        return sign(self - other) <= 0

    def __gt__(self, other: Number) -> bool:
        return sign(self - other) > 0

    def __ge__(self, other: Number) -> bool:
        return sign(self - other) >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(2) + float(self.c) * math.sqrt(3) + float(
            self.d
        ) * math.sqrt(6)


ZERO = FieldElement(0)
ONE = FieldElement(1)
R2 = FieldElement(0, 1)
R3 = FieldElement(0, 0, 1)
R6 = FieldElement(0, 0, 0, 1)
#: sqrt(3)/3, the parameter value singling out the polytope in its deformation family.
T = FieldElement(0, 0, mpq(1, 3))


def field_arith(x: FieldElement, y: FieldElement, op: str) -> FieldElement:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown field operation {op!r}")


def _enclose(q: Rational, root: tuple[int, int], bits: int) -> tuple[Rational, Rational]:
    # q * [lo, hi] where [lo, hi] is the dyadic enclosure of the root at this precision
    lo, hi = root
    scale = mpq(1, 1 << bits)
    if q >= 0:
        return q * lo * scale, q * hi * scale
    return q * hi * scale, q * lo * scale


def sign(x: FieldElement) -> int:
    """Exact sign of ``a + b*sqrt2 + c*sqrt3 + d*sqrt6``.

    Zero is detected on coordinates. Otherwise the value is enclosed by
    dyadic intervals around the square roots, doubling the precision until
    the interval excludes zero; this terminates because a nonzero element
    is bounded away from zero.
    """
    if x.is_zero():
        return 0
    if x.is_rational():
        return 1 if x.a > 0 else -1
    bits = 32
    while True:
        four = 1 << (2 * bits)
        roots = []
        for n in (2, 3, 6):
            s = math.isqrt(n * four)
            roots.append((s, s + 1))
        lo, hi = x.a, x.a
        for q, root in zip((x.b, x.c, x.d), roots):
            if q:
                l, h = _enclose(q, root, bits)
                lo += l
                hi += h
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


_RAT = r"\d+(?:/\d+)?"
_TERM = re.compile(rf"\s*([+-]?)\s*({_RAT})?\s*(?:\*?\s*(r2|r3|r6))?\s*")


def format_rational(q: Rational) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_field(x: FieldElement) -> str:
    """Render as ``a + b*r2 + c*r3 + d*r6``, dropping zero terms."""
    parts: list[str] = []
    for q, name in zip(x.coords, ("", "r2", "r3", "r6")):
        if not q:
            continue
        mag = format_rational(abs(q))
        body = mag if not name else f"{mag}*{name}"
        if not parts:
            parts.append(body if q > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if q > 0 else f"- {body}")
    return " ".join(parts) if parts else "0"


def parse_field(text: str) -> FieldElement:
    """Parse the grammar produced by :func:`format_field`.

    Terms are ``p/q``, ``p/q*rK`` or a bare ``rK`` (K in 2, 3, 6), joined
    by ``+`` or ``-``; coefficients of a repeated basis element add up.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty field element")
    coeffs = {"": Fraction(0), "r2": Fraction(0), "r3": Fraction(0), "r6": Fraction(0)}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse field element {text!r} at {pos}")
        sgn, num, basis = m.groups()
        if not num and not basis:
            raise ValueError(f"cannot parse field element {text!r} at {pos}")
        if not first and not sgn:
            raise ValueError(f"missing operator in {text!r} at {pos}")
        q = Fraction(num) if num else Fraction(1)
        coeffs[basis or ""] += -q if sgn == "-" else q
        pos = m.end()
        first = False
    return FieldElement(coeffs[""], coeffs["r2"], coeffs["r3"], coeffs["r6"])


def _as_field(x) -> FieldElement:
    if isinstance(x, str):
        return parse_field(x)
    return FieldElement.coerce(x)


class LorentzVector:
    """A vector of Minkowski space R^{1,4} with field coordinates."""

    __slots__ = ("x", "_hash")

    def __init__(self, coords: Iterable):
        self.x: tuple[FieldElement, ...] = tuple(_as_field(c) for c in coords)
        if len(self.x) != 5:
            raise ValueError(f"LorentzVector needs 5 coordinates, got {len(self.x)}")
        self._hash = None

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, i: int) -> FieldElement:
        return self.x[i]

    def __len__(self) -> int:
        return 5

    def __eq__(self, other) -> bool:
        return isinstance(other, LorentzVector) and self.x == other.x

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.x)
        return self._hash

    def __repr__(self) -> str:
        return "LorentzVector(" + ", ".join(format_field(c) for c in self.x) + ")"

    def __add__(self, other: LorentzVector) -> LorentzVector:
        return LorentzVector(p + q for p, q in zip(self.x, other.x))

    def __sub__(self, other: LorentzVector) -> LorentzVector:
        return LorentzVector(p - q for p, q in zip(self.x, other.x))

    def __neg__(self) -> LorentzVector:
        return LorentzVector(-p for p in self.x)

    def scale(self, k: Number) -> LorentzVector:
        return LorentzVector(p * k for p in self.x)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.x)

    def norm2(self) -> FieldElement:
        return minkowski_inner(self, self)

    def primitive(self) -> LorentzVector:
        """Divide by the absolute value of the first nonzero coordinate.

        Two vectors spanning the same ray get the same representative.
        """
        for p in self.x:
            if p:
                return self.scale(1 / p) if p.sign() > 0 else self.scale(-1 / p)
        return self


def minkowski_inner(x: LorentzVector, y: LorentzVector) -> FieldElement:
    """``<x, y> = -x0*y0 + x1*y1 + ... + x4*y4``."""
    acc = -(x[0] * y[0])
    for i in range(1, 5):
        acc = acc + x[i] * y[i]
    return acc


MINKOWSKI_J = (-1, 1, 1, 1, 1)


def _rref(rows: list[list[FieldElement]], ncols: int) -> tuple[list[list[FieldElement]], list[int]]:
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][col].inverse()
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                k = m[i][col]
                m[i] = [u - k * v for u, v in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def solve_linear(rows: Sequence[LorentzVector]) -> list[LorentzVector]:
    """Basis of ``{x : <x, row> = 0 for every row}``; dimension ``5 - rank``."""
    if not 1 <= len(rows) <= 5:
        raise ValueError("solve_linear needs between 1 and 5 rows")
    # <x, v> = sum_i J_i v_i x_i, so the coefficient rows are J*v
    eqs = [[v[i] * MINKOWSKI_J[i] for i in range(5)] for v in rows]
    red, pivots = _rref(eqs, 5)
    free = [c for c in range(5) if c not in pivots]
    basis = []
    for fc in free:
        x = [ZERO] * 5
        x[fc] = ONE
        for row, pc in zip(red, pivots):
            x[pc] = -row[fc]
        basis.append(LorentzVector(x))
    return basis


class Isometry:
    """A 5x5 matrix over the field acting on R^{1,4}."""

    __slots__ = ("m", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        self.m: tuple[tuple[FieldElement, ...], ...] = tuple(
            tuple(_as_field(v) for v in row) for row in rows
        )
        if len(self.m) != 5 or any(len(r) != 5 for r in self.m):
            raise ValueError("Isometry needs a 5x5 matrix")
        self._hash = None

    @classmethod
    def identity(cls) -> Isometry:
        return cls([[1 if i == j else 0 for j in range(5)] for i in range(5)])

    @classmethod
    def diagonal(cls, diag: Sequence) -> Isometry:
        return cls([[diag[i] if i == j else 0 for j in range(5)] for i in range(5)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Isometry) and self.m == other.m

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.m)
        return self._hash

    def __repr__(self) -> str:
        return "Isometry([" + "; ".join(", ".join(format_field(v) for v in r) for r in self.m) + "])"

    def apply(self, v: LorentzVector) -> LorentzVector:
        return LorentzVector(
            sum((self.m[i][j] * v[j] for j in range(5)), ZERO) for i in range(5)
        )

    def __matmul__(self, other):
        if isinstance(other, LorentzVector):
            return self.apply(other)
        if isinstance(other, Isometry):
            return Isometry(
                [
                    [sum((self.m[i][k] * other.m[k][j] for k in range(5)), ZERO) for j in range(5)]
                    for i in range(5)
                ]
            )
        return NotImplemented

    def transpose(self) -> Isometry:
        return Isometry([[self.m[j][i] for j in range(5)] for i in range(5)])

    def preserves_form(self) -> bool:
        """Check ``M^T J M = J`` exactly."""
        for i in range(5):
            for j in range(5):
                acc = ZERO
                for k in range(5):
                    if self.m[k][i] and self.m[k][j]:
                        acc = acc + self.m[k][i] * self.m[k][j] * MINKOWSKI_J[k]
                want = MINKOWSKI_J[i] if i == j else 0
                if acc != want:
                    return False
        return True

    def is_isometry(self) -> bool:
        """Preserves the form and the upper sheet of the hyperboloid."""
        return self.preserves_form() and self.m[0][0].sign() > 0

    def det(self) -> FieldElement:
        m = [list(r) for r in self.m]
        acc = ONE
        for col in range(5):
            piv = next((i for i in range(col, 5) if m[i][col]), None)
            if piv is None:
                return ZERO
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                acc = -acc
            acc = acc * m[col][col]
            inv = m[col][col].inverse()
            for i in range(col + 1, 5):
                if m[i][col]:
                    k = m[i][col] * inv
                    m[i] = [u - k * v for u, v in zip(m[i], m[col])]
        return acc

    def rows_text(self) -> list[str]:
        return [", ".join(format_field(v) for v in r) for r in self.m]
