"""Quandle families: linear, loglinear, conjugation and finite tables.

A quandle here is a carrier plus a family of operations.  Each operation is
named by an :class:`OpLabel`; the ``inverse`` flag selects the right-inverse
operation, so ``apply(op.inverted(), apply(op, x, y), y) == x``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .colors import (
    EPS_EQ,
    Mat,
    Perm,
    PowerProduct,
    Vec,
    color_key,
    colors_equal,
)


class QuandleError(ValueError):
    """Raised for carrier mismatches and inadmissible operations."""


@dataclass(frozen=True)
class OpLabel:
    """One operation of a quandle family.

    ``param`` is the family parameter (``s`` for linear/loglinear, the table
    name for finite tables, ``None`` for conjugation).
    """

    family: str
    param: Any = None
    inverse: bool = False

    def inverted(self) -> "OpLabel":
        return OpLabel(self.family, self.param, not self.inverse)

    def forward(self) -> "OpLabel":
        return OpLabel(self.family, self.param, False)

    def param_key(self):
        p = self.param
        if p is None or isinstance(p, str):
            return p
        if isinstance(p, (int, Fraction)):
            return str(Fraction(p))
        if isinstance(p, float):
            return color_key(p)[1]
        return str(p)

    def key(self) -> tuple:
        return (self.family, self.param_key(), self.inverse)

    def to_json(self) -> dict:
        out = {"family": self.family}
        if self.param is not None:
            p = self.param
            out["s" if self.family in ("linear", "loglinear") else "table"] = (
                str(p) if isinstance(p, Fraction) else p
            )
        out["inverse"] = self.inverse
        return out

    def __str__(self):
        arrow = "inv" if self.inverse else "fwd"
        return f"{self.family}[{self.param_key()}]{arrow}"


def linear(s, inverse: bool = False) -> OpLabel:
    """Shorthand for a linear-family label; ints and strings become Fractions."""
    if isinstance(s, (int, str)):
        s = Fraction(s)
    return OpLabel("linear", s, inverse)


@dataclass
class AxiomResult:
    passed: bool
    checked: int
    witness: tuple | None = None


@dataclass
class AxiomReport:
    idempotence: AxiomResult
    reversibility: AxiomResult
    distributivity: AxiomResult

    @property
    def ok(self) -> bool:
        return self.idempotence.passed and self.reversibility.passed and self.distributivity.passed

    def violations(self) -> int:
        return sum(
            r.checked and not r.passed
            for r in (self.idempotence, self.reversibility, self.distributivity)
        )


class Quandle:
    """Base class.  Subclasses implement ``_forward`` and ``_backward``."""

    family = "abstract"
    finite = False

    def apply(self, op: OpLabel, x, y):
        self.check_op(op)
        x, y = self.coerce(x), self.coerce(y)
        return self._backward(op.param, x, y) if op.inverse else self._forward(op.param, x, y)

    def invert(self, op: OpLabel, z, y):
        """The unique ``x`` with ``apply(op, x, y) == z``."""
        return self.apply(op.inverted(), z, y)

    def apply_power(self, op: OpLabel, x, y, exponent: int):
        """``x`` acted on by ``y`` with ``op`` (exponent +1) or its inverse (-1)."""
        return self.apply(op if exponent > 0 else op.inverted(), x, y)

    def check_op(self, op: OpLabel) -> None:
        if op.family != self.family:
            raise QuandleError(f"operation family {op.family!r} does not belong to {self.family!r}")

    def coerce(self, x):
        return x

    def equal(self, a, b) -> bool:
        return colors_equal(a, b, EPS_EQ)

    def elements(self) -> list | None:
        return None

    def sample(self, rng: random.Random):
        raise NotImplementedError

    def default_ops(self) -> list[OpLabel]:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


class LinearQuandle(Quandle):
    """``x |> y = (1-s) x + s y`` over Q, R or sympy, entrywise on vectors/matrices.

    ``field`` is ``"rational"`` (exact Fractions), ``"float"`` or ``"symbolic"``.
    """

    family = "linear"

    def __init__(self, field: str = "rational", params: Sequence | None = None,
                 shape: tuple | None = None, allow_degenerate: bool = False):
        if field not in ("rational", "float", "symbolic"):
            raise QuandleError(f"unknown field {field!r}")
        self.field = field
        # only for demonstrating that s = 1 breaks reversibility
        self.allow_degenerate = allow_degenerate
        self.shape = shape  # None scalar, (n,) vector, (n, n) matrix
        self.params = tuple(self._param(p) for p in params) if params else ()

    def _param(self, s):
        if self.field == "rational":
            if isinstance(s, float):
                raise QuandleError("rational linear quandle needs exact parameters")
            s = Fraction(s)
        elif self.field == "float":
            s = float(s)
        if _is_one(s) and not self.allow_degenerate:
            raise QuandleError("linear parameter s = 1 is not invertible")
        return s

    def check_op(self, op: OpLabel) -> None:
        super().check_op(op)
        if _is_one(op.param) and not self.allow_degenerate:
            raise QuandleError("linear parameter s = 1 is not invertible")

    def coerce(self, x):
        if isinstance(x, Vec):
            return Vec(self._scalar(a) for a in x)
        if isinstance(x, Mat):
            return Mat([[self._scalar(a) for a in r] for r in x.rows])
        return self._scalar(x)

    def _scalar(self, a):
        if self.field == "rational":
            if isinstance(a, float):
                raise QuandleError(f"float colour {a!r} in a rational quandle")
            if isinstance(a, complex):
                return a
            if isinstance(a, (int, Fraction, str)):
                return Fraction(a)
            return a
        if self.field == "float":
            if isinstance(a, complex):
                return a
            return float(a)
        return a

    def _forward(self, s, x, y):
        return x * (1 - s) + y * s

    def _backward(self, s, z, y):
        return (z - y * s) / (1 - s)

    def automorphism(self, a, b) -> "AffineMap":
        return AffineMap(a, b)

    def sample(self, rng: random.Random):
        def one():
            if self.field == "float":
                return rng.uniform(-10, 10)
            return Fraction(rng.randint(-40, 40), rng.randint(1, 12))

        if self.shape is None:
            return one()
        if len(self.shape) == 1:
            return Vec(one() for _ in range(self.shape[0]))
        n = self.shape[0]
        rows = [[one() for _ in range(n)] for _ in range(n)]
        return Mat([[rows[i][j] if i <= j else rows[j][i] for j in range(n)] for i in range(n)])

    def default_ops(self) -> list[OpLabel]:
        return [OpLabel("linear", s) for s in self.params]

    def descriptor(self) -> dict:
        d = {"family": "linear", "field": self.field}
        if self.params:
            d["params"] = [str(p) for p in self.params]
        return d


def _is_one(s) -> bool:
    try:
        return s == 1 or (isinstance(s, float) and abs(s - 1) < EPS_EQ)
    except TypeError:
        return False


@dataclass(frozen=True)
class AffineMap:
    """``x -> a x + b``, an automorphism of every linear quandle when ``a != 0``."""

    a: Any
    b: Any

    def __post_init__(self):
        if self.a == 0:
            raise QuandleError("affine automorphism needs a != 0")

    def __call__(self, x):
        return x * self.a + self.b

    def inverse(self) -> "AffineMap":
        return AffineMap(1 / self.a, -self.b / self.a)


class LoglinearQuandle(Quandle):
    """``x |> y = x**(1-s) * y**s`` on positive reals.

    With ``exact=True`` colours are :class:`PowerProduct` values and ``s``
    is rational, so the axioms hold without rounding.
    """

    family = "loglinear"

    def __init__(self, exact: bool = True, params: Sequence | None = None):
        self.exact = exact
        self.params = tuple(Fraction(p) if exact else float(p) for p in (params or ()))
        if any(_is_one(p) for p in self.params):
            raise QuandleError("loglinear parameter s = 1 is not invertible")

    def coerce(self, x):
        if self.exact:
            if isinstance(x, PowerProduct):
                return x
            if isinstance(x, float):
                raise QuandleError("float colour in an exact loglinear quandle")
            return PowerProduct.from_fraction(x)
        x = float(x)
        if x <= 0:
            raise QuandleError(f"loglinear colours must be positive, got {x!r}")
        return x

    def check_op(self, op: OpLabel) -> None:
        super().check_op(op)
        if _is_one(op.param):
            raise QuandleError("loglinear parameter s = 1 is not invertible")

    def _forward(self, s, x, y):
        if self.exact:
            return x.power(1 - Fraction(s)) * y.power(Fraction(s))
        return x ** (1 - s) * y ** s

    def _backward(self, s, z, y):
        if self.exact:
            s = Fraction(s)
            return (z / y.power(s)).power(1 / (1 - s))
        return (z / y ** s) ** (1 / (1 - s))

    def sample(self, rng: random.Random):
        q = Fraction(rng.randint(1, 30), rng.randint(1, 12))
        return PowerProduct.from_fraction(q) if self.exact else float(q)

    def default_ops(self) -> list[OpLabel]:
        return [OpLabel("loglinear", s) for s in self.params]

    def descriptor(self) -> dict:
        return {"family": "loglinear", "exact": self.exact, "params": [str(p) for p in self.params]}


class ConjugationQuandle(Quandle):
    """``x |> y = y^-1 x y`` in a group of permutations or invertible matrices."""

    family = "conjugation"

    def __init__(self, group: str = "perm", n: int = 3):
        if group not in ("perm", "matrix"):
            raise QuandleError(f"unknown group {group!r}")
        self.group = group
        self.n = n
        self.finite = group == "perm"

    def coerce(self, x):
        if self.group == "perm":
            if not isinstance(x, Perm):
                x = Perm(x)
            if len(x.images) != self.n:
                raise QuandleError(f"permutation of wrong degree: {x}")
            return x
        if not isinstance(x, Mat):
            x = Mat(x)
        if x.shape != (self.n, self.n):
            raise QuandleError(f"matrix of wrong shape: {x.shape}")
        return Mat([[Fraction(a) if isinstance(a, int) else a for a in r] for r in x.rows])

    def _inv(self, y):
        return y.inverse()

    def _mul(self, a, b):
        return a * b if self.group == "perm" else a @ b

    def _forward(self, _param, x, y):
        return self._mul(self._mul(self._inv(y), x), y)

    def _backward(self, _param, z, y):
        return self._mul(self._mul(y, z), self._inv(y))

    def identity(self):
        return Perm.identity(self.n) if self.group == "perm" else Mat.identity(self.n)

    def elements(self):
        if self.group == "perm":
            return [Perm(p) for p in itertools.permutations(range(self.n))]
        return None

    def sample(self, rng: random.Random):
        if self.group == "perm":
            images = list(range(self.n))
            rng.shuffle(images)
            return Perm(images)
        while True:
            m = Mat([[Fraction(rng.randint(-3, 3)) for _ in range(self.n)] for _ in range(self.n)])
            try:
                m.inverse()
                return m
            except ZeroDivisionError:
                continue

    def default_ops(self) -> list[OpLabel]:
        return [OpLabel("conjugation")]

    def descriptor(self) -> dict:
        return {"family": "conjugation", "group": self.group, "n": self.n}


class TableQuandle(Quandle):
    """Finite quandle on ``range(n)`` given by one or more operation tables.

    ``tables[name][x][y]`` is ``x |> y``.  Tables are not assumed to satisfy
    the axioms; use :func:`check_axioms`.  Reversibility failures surface as
    a missing inverse entry.
    """

    family = "table"
    finite = True

    def __init__(self, tables: dict[str, Sequence[Sequence[int]]]):
        if not tables:
            raise QuandleError("a table quandle needs at least one table")
        self.tables = {name: tuple(tuple(int(v) for v in row) for row in t) for name, t in tables.items()}
        sizes = {len(t) for t in self.tables.values()}
        if len(sizes) != 1:
            raise QuandleError("all tables must share one carrier size")
        self.n = sizes.pop()
        for name, t in self.tables.items():
            if any(len(row) != self.n or not all(0 <= v < self.n for v in row) for row in t):
                raise QuandleError(f"table {name!r} is not an n-by-n table on range(n)")
        self._inverse = {}
        for name, t in self.tables.items():
            inv: dict[tuple[int, int], int] = {}
            for x in range(self.n):
                for y in range(self.n):
                    inv.setdefault((t[x][y], y), x)
            self._inverse[name] = inv

    def check_op(self, op: OpLabel) -> None:
        super().check_op(op)
        if op.param not in self.tables:
            raise QuandleError(f"unknown table {op.param!r}")

    def coerce(self, x):
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < self.n:
            if isinstance(x, Fraction) and x.denominator == 1 and 0 <= x < self.n:
                return int(x)
            raise QuandleError(f"{x!r} is not an element of range({self.n})")
        return x

    def _forward(self, name, x, y):
        return self.tables[name][x][y]

    def _backward(self, name, z, y):
        try:
            return self._inverse[name][(z, y)]
        except KeyError:
            raise QuandleError(f"table {name!r} has no entry x with x |> {y} = {z}") from None

    def elements(self):
        return list(range(self.n))

    def sample(self, rng: random.Random):
        return rng.randrange(self.n)

    def default_ops(self) -> list[OpLabel]:
        return [OpLabel("table", name) for name in self.tables]

    def descriptor(self) -> dict:
        return {"family": "table", "tables": {k: [list(r) for r in v] for k, v in self.tables.items()}}


def dihedral(p: int) -> TableQuandle:
    """Dihedral quandle ``a |> b = 2b - a (mod p)`` under the table name ``"R"``."""
    return TableQuandle({"R": [[(2 * b - a) % p for b in range(p)] for a in range(p)]})


def quandle_from_descriptor(d: dict) -> Quandle:
    fam = d.get("family")
    if fam == "linear":
        return LinearQuandle(d.get("field", "rational"), d.get("params"))
    if fam == "loglinear":
        return LoglinearQuandle(d.get("exact", True), d.get("params"))
    if fam == "conjugation":
        return ConjugationQuandle(d.get("group", "perm"), int(d.get("n", 3)))
    if fam == "table":
        return TableQuandle(d["tables"])
    raise QuandleError(f"unknown quandle family {fam!r}")


def check_axioms(q: Quandle, ops: Iterable[OpLabel] | None = None, samples: int = 1000,
                 seed: int = 0) -> AxiomReport:
    """Test the three axioms, exhaustively on finite carriers, else on seeded samples."""
    ops = list(ops) if ops is not None else q.default_ops()
    ops = ops + [o.inverted() for o in ops if not o.inverse]
    rng = random.Random(seed)
    elems = q.elements()

    def safe(fn, *args):
        try:
            return fn(*args)
        except (QuandleError, ZeroDivisionError):
            return _FAIL

    if elems is not None:
        singles = [(x,) for x in elems]
        pairs = list(itertools.product(elems, repeat=2))
        triples = list(itertools.product(elems, repeat=3))
        op_cases = [(o,) for o in ops]
        pair_ops = list(itertools.product(ops, repeat=2))
    else:
        singles = [(q.sample(rng),) for _ in range(samples)]
        pairs = [(q.sample(rng), q.sample(rng)) for _ in range(samples)]
        triples = [(q.sample(rng), q.sample(rng), q.sample(rng)) for _ in range(samples)]
        op_cases = [(o,) for o in ops]
        pair_ops = [(rng.choice(ops), rng.choice(ops)) for _ in range(samples)]

    def run_idem():
        n = 0
        for (o,) in op_cases:
            for (x,) in singles:
                n += 1
                r = safe(q.apply, o, x, x)
                if r is _FAIL or not q.equal(r, q.coerce(x)):
                    return AxiomResult(False, n, (o, x, x))
        return AxiomResult(True, n)

    def run_rev():
        n = 0
        for (o,) in op_cases:
            if elems is not None:
                # bijectivity of x -> x |> y for every y
                for y in elems:
                    images = {color_key(safe(q.apply, o, x, y)) if safe(q.apply, o, x, y) is not _FAIL
                              else None for x in elems}
                    n += 1
                    if len(images) != len(elems) or None in images:
                        return AxiomResult(False, n, (o, None, y))
            for x, y in pairs:
                n += 1
                a = safe(q.apply, o, x, y)
                back = _FAIL if a is _FAIL else safe(q.invert, o, a, y)
                b = safe(q.invert, o, x, y)
                fwd = _FAIL if b is _FAIL else safe(q.apply, o, b, y)
                x_ = q.coerce(x)
                if back is _FAIL or fwd is _FAIL or not q.equal(back, x_) or not q.equal(fwd, x_):
                    return AxiomResult(False, n, (o, x, y))
        return AxiomResult(True, n)

    def run_dist():
        n = 0
        if elems is not None:
            cases = ((o1, o2, t) for o1, o2 in pair_ops for t in triples)
        else:
            cases = ((o1, o2, t) for (o1, o2), t in zip(pair_ops, triples))
        for o1, o2, (x, y, z) in cases:
            n += 1
            lhs = safe(lambda: q.apply(o2, q.apply(o1, x, y), z))
            rhs = safe(lambda: q.apply(o1, q.apply(o2, x, z), q.apply(o2, y, z)))
            if lhs is _FAIL or rhs is _FAIL or not q.equal(lhs, rhs):
                return AxiomResult(False, n, (o1, o2, x, y, z))
        return AxiomResult(True, n)

    return AxiomReport(run_idem(), run_rev(), run_dist())


class _Fail:
    def __repr__(self):
        return "<fail>"


_FAIL = _Fail()
