"""Colour payloads for quandle carriers.

Scalars are plain ``Fraction``/``float`` (or sympy expressions in symbolic
mode).  The small value classes here cover the remaining carriers: vectors,
square matrices, permutations and exact positive power products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable

EPS_EQ = 1e-9
EPS_HERM = 1e-12


def _is_float_like(v) -> bool:
    return isinstance(v, (float, complex))


@dataclass(frozen=True)
class Vec:
    """Immutable vector with entrywise arithmetic."""

    items: tuple

    def __init__(self, items: Iterable):
        object.__setattr__(self, "items", tuple(items))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __add__(self, other: "Vec") -> "Vec":
        if not isinstance(other, Vec) or len(other) != len(self):
            return NotImplemented
        return Vec(a + b for a, b in zip(self.items, other.items))

    def __sub__(self, other: "Vec") -> "Vec":
        if not isinstance(other, Vec) or len(other) != len(self):
            return NotImplemented
        return Vec(a - b for a, b in zip(self.items, other.items))

    def __neg__(self):
        return Vec(-a for a in self.items)

    def __mul__(self, k):
        if isinstance(k, (Vec, Mat)):
            return NotImplemented
        return Vec(a * k for a in self.items)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return Vec(a / k for a in self.items)

    def __repr__(self):
        return f"Vec({list(self.items)!r})"


@dataclass(frozen=True)
class Mat:
    """Immutable square (or rectangular) matrix stored as nested tuples."""

    rows: tuple

    def __init__(self, rows: Iterable[Iterable]):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int, one=Fraction(1)) -> "Mat":
        zero = one - one
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values) -> "Mat":
        values = list(values)
        zero = values[0] - values[0]
        return cls([[v if i == j else zero for j, _ in enumerate(values)] for i, v in enumerate(values)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __add__(self, other):
        if not isinstance(other, Mat) or other.shape != self.shape:
            return NotImplemented
        return Mat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        if not isinstance(other, Mat) or other.shape != self.shape:
            return NotImplemented
        return Mat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Mat([[-a for a in r] for r in self.rows])

    def __mul__(self, k):
        if isinstance(k, (Mat, Vec)):
            return NotImplemented
        return Mat([[a * k for a in r] for r in self.rows])

    __rmul__ = __mul__

    def __truediv__(self, k):
        return Mat([[a / k for a in r] for r in self.rows])

    def __matmul__(self, other: "Mat") -> "Mat":
        n, m = self.shape
        m2, p = other.shape
        if m != m2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.rows))
        return Mat([[sum((a * b for a, b in zip(r, c)), start=r[0] * 0) for c in cols] for r in self.rows])

    def transpose(self) -> "Mat":
        return Mat(zip(*self.rows))

    def adjoint(self) -> "Mat":
        return Mat([[_conj(a) for a in r] for r in zip(*self.rows)])

    def trace(self):
        return sum((self.rows[i][i] for i in range(len(self.rows))), start=self.rows[0][0] * 0)

    def is_hermitian(self, tol: float = EPS_HERM) -> bool:
        n, m = self.shape
        if n != m:
            return False
        for i in range(n):
            for j in range(i, n):
                d = self.rows[i][j] - _conj(self.rows[j][i])
                if _is_float_like(d):
                    if abs(d) > tol:
                        return False
                elif d != 0:
                    return False
        return True

    def inverse(self) -> "Mat":
        from .linalg import mat_inverse

        return Mat(mat_inverse([list(r) for r in self.rows]))

    def to_numpy(self):
        import numpy as np

        dtype = complex if any(isinstance(a, complex) for r in self.rows for a in r) else float
        return np.array([[dtype(a) for a in r] for r in self.rows], dtype=dtype)

    def __repr__(self):
        return f"Mat({[list(r) for r in self.rows]!r})"


def _conj(a):
    c = getattr(a, "conjugate", None)
    return c() if c is not None else a


@dataclass(frozen=True, order=True)
class Perm:
    """Permutation of ``range(n)``; ``images[i]`` is the image of ``i``.

    Products compose right to left: ``(p * q)(i) == p(q(i))``.
    """

    images: tuple

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(range(n))

    def __mul__(self, other: "Perm") -> "Perm":
        if not isinstance(other, Perm) or len(other.images) != len(self.images):
            return NotImplemented
        return Perm(self.images[i] for i in other.images)

    def inverse(self) -> "Perm":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm(inv)

    def __repr__(self):
        return f"Perm({list(self.images)})"


@dataclass(frozen=True)
class PowerProduct:
    """Exact positive real ``prod p**e`` with rational exponents.

    Closed under ``x**(1-s) * y**s`` for rational ``s``, so the loglinear
    quandle can be checked without rounding.
    """

    exponents: tuple  # sorted ((prime, Fraction), ...), zero exponents dropped

    def __init__(self, exponents=()):
        if isinstance(exponents, dict):
            exponents = exponents.items()
        clean = tuple(sorted((int(p), Fraction(e)) for p, e in exponents if Fraction(e) != 0))
        object.__setattr__(self, "exponents", clean)

    @classmethod
    def from_int(cls, n: int) -> "PowerProduct":
        if n <= 0:
            raise ValueError("PowerProduct needs a positive integer")
        return cls(_factor(n))

    @classmethod
    def from_fraction(cls, q) -> "PowerProduct":
        q = Fraction(q)
        if q <= 0:
            raise ValueError("PowerProduct needs a positive rational")
        num = dict(_factor(q.numerator))
        for p, e in _factor(q.denominator).items():
            num[p] = num.get(p, 0) - e
        return cls(num)

    def as_dict(self) -> dict:
        return dict(self.exponents)

    def power(self, k) -> "PowerProduct":
        return PowerProduct({p: e * Fraction(k) for p, e in self.exponents})

    def __mul__(self, other: "PowerProduct") -> "PowerProduct":
        d = self.as_dict()
        for p, e in other.exponents:
            d[p] = d.get(p, 0) + e
        return PowerProduct(d)

    def __truediv__(self, other: "PowerProduct") -> "PowerProduct":
        return self * other.power(-1)

    def __float__(self):
        return math.exp(sum(float(e) * math.log(p) for p, e in self.exponents))

    def __repr__(self):
        return f"PowerProduct({dict((p, str(e)) for p, e in self.exponents)})"


def _factor(n: int) -> dict:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_exact(c) -> bool:
    """True if ``c`` compares exactly (no float payload anywhere)."""
    if isinstance(c, (Fraction, int, Perm, PowerProduct)) and not isinstance(c, bool):
        return True
    if isinstance(c, Vec):
        return all(is_exact(a) for a in c.items)
    if isinstance(c, Mat):
        return all(is_exact(a) for r in c.rows for a in r)
    return False


def _flat(c) -> list:
    if isinstance(c, Vec):
        return list(c.items)
    if isinstance(c, Mat):
        return [a for r in c.rows for a in r]
    return [c]


def colors_equal(a, b, tol: float = EPS_EQ) -> bool:
    """Exact equality for exact payloads, ``tol``-closeness for floats."""
    if type(a) is not type(b) and not (isinstance(a, Number) and isinstance(b, Number)):
        # sympy expressions vs numbers, etc.
        if _is_symbolic(a) or _is_symbolic(b):
            return _symbolic_zero(a - b)
        return False
    if isinstance(a, (Perm, PowerProduct)):
        return a == b
    if isinstance(a, (Vec, Mat)):
        fa, fb = _flat(a), _flat(b)
        if isinstance(a, Mat) and a.shape != b.shape:
            return False
        if len(fa) != len(fb):
            return False
        return all(colors_equal(x, y, tol) for x, y in zip(fa, fb))
    if _is_symbolic(a) or _is_symbolic(b):
        return _symbolic_zero(a - b)
    if _is_float_like(a) or _is_float_like(b):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
    return a == b


def _is_symbolic(x) -> bool:
    return type(x).__module__.startswith("sympy")


def _symbolic_zero(d) -> bool:
    import sympy

    return sympy.simplify(d) == 0


def color_key(c, tol: float = EPS_EQ):
    """Hashable, sortable key; floats are quantized at ``tol``."""
    if isinstance(c, bool):
        raise TypeError("bool is not a colour")
    if isinstance(c, int):
        return ("i", c)
    if isinstance(c, Fraction):
        return ("q", str(c))
    if isinstance(c, float):
        if not math.isfinite(c):
            raise ValueError(f"non-finite colour {c!r}")
        return ("q", str(Fraction(round(c / tol)) * Fraction(str(tol))))
    if isinstance(c, complex):
        return ("c", color_key(c.real, tol), color_key(c.imag, tol))
    if isinstance(c, Vec):
        return ("v",) + tuple(color_key(a, tol) for a in c.items)
    if isinstance(c, Mat):
        return ("m", c.shape) + tuple(color_key(a, tol) for r in c.rows for a in r)
    if isinstance(c, Perm):
        return ("p",) + c.images
    if isinstance(c, PowerProduct):
        return ("w",) + tuple((p, str(e)) for p, e in c.exponents)
    if _is_symbolic(c):
        raise TypeError("symbolic colours cannot be canonicalized")
    raise TypeError(f"unsupported colour type {type(c).__name__}")


def to_float(c):
    """Float copy of a colour, used for quantized comparisons and numerics."""
    if isinstance(c, Vec):
        return Vec(to_float(a) for a in c.items)
    if isinstance(c, Mat):
        return Mat([[to_float(a) for a in r] for r in c.rows])
    if isinstance(c, complex):
        return c
    if isinstance(c, (Perm, int)) and not isinstance(c, (Fraction, float)):
        return c
    return float(c)
