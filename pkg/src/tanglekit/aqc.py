"""Hamiltonian-coloured machines and spectral gaps along ``s``.

Colours are Hermitian matrices and every interaction is the linear
operation ``(1-s) X + s Y``, so a machine evaluated at ``s`` is an
interpolation schedule.  A register whose gap closes somewhere in ``(0, 1)``
makes the schedule infeasible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from scipy.optimize import minimize_scalar

from .colors import EPS_HERM, Mat, to_float
from .linalg import hermitian_eigenvalues
from .machine import Agent, Component, Machine, color
from .moves import MoveSite, apply_move
from .quandle import LinearQuandle, OpLabel

H0 = Mat([[Fraction(0), Fraction(0)], [Fraction(0), Fraction(1)]])
H1 = Mat([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(0)]])
SIGMA_X = Mat([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]])

GRID_LO, GRID_HI = 1e-4, 1 - 1e-4
DEFAULT_THRESHOLD = 1e-6


class NotHermitian(ValueError):
    pass


def eigenvalues(h: Mat) -> list[float]:
    if not h.is_hermitian(EPS_HERM):
        raise NotHermitian("gap is defined for Hermitian colours only")
    return hermitian_eigenvalues([[complex(a) for a in r] for r in h.rows])


def gap(h: Mat) -> float:
    """``lambda_1 - lambda_0`` with eigenvalues in ascending order."""
    ev = eigenvalues(h)
    if len(ev) < 2:
        return 0.0
    return ev[1] - ev[0]


def gap_2x2(h: Mat) -> float:
    """Closed form ``sqrt(tr^2 - 4 det)`` for a 2x2 Hermitian matrix."""
    a, b = complex(h[0, 0]).real, complex(h[0, 1])
    d = complex(h[1, 1]).real
    tr, det = a + d, a * d - abs(b) ** 2
    return math.sqrt(max(tr * tr - 4 * det, 0.0))


def _quandle_for(s):
    exact = isinstance(s, (int, Fraction))
    return LinearQuandle("rational" if exact else "float", shape=(2, 2)), (Fraction(s) if exact else float(s))


@dataclass(frozen=True)
class Family:
    """A one-parameter machine family ``s -> Machine``."""

    name: str
    build: Callable

    def __call__(self, s) -> Machine:
        return self.build(s)


def _single(s) -> Machine:
    q, s = _quandle_for(s)
    m = Machine(
        q,
        [Component("path", ["h0", "hout"]), Component("path", ["h1"])],
        {"h1": Agent(OpLabel("linear", s), [("h0", 1)])},
        {"h0": H0, "h1": H1},
    )
    return color(m)


def _middle(s) -> Machine:
    q, s = _quandle_for(s)
    op = OpLabel("linear", s)
    m = Machine(
        q,
        [
            Component("path", ["h0", "hp", "hout"]),
            Component("path", ["sx", "sx1"]),
            Component("path", ["h1"]),
        ],
        {
            "sx": Agent(op, [("h0", 1)]),
            "h1": Agent(op, [("hp", 1), ("sx", 1)]),
        },
        {"h0": H0, "sx": SIGMA_X, "h1": H1},
    )
    return color(m)


RIGHT_R3 = MoveSite("R3", "sx", agent="h1", partner="sx1", choices=(("h0", "hp"),))


def _right(s) -> Machine:
    return apply_move(_middle(s), RIGHT_R3).relabel({"hp": "hpp"})


def left_moves(s) -> list[MoveSite]:
    _, s = _quandle_for(s)
    return [
        MoveSite("Stab+", "h0", op=OpLabel("linear", s), variant="agent"),
        MoveSite("R2+", "sx", agent="h0", side="before", sign=-1),
    ]


def _left(s) -> Machine:
    m = _middle(s)
    for site in left_moves(s):
        m = apply_move(m, site)
    return m.relabel({"sx'": "g", "sx''": "sxin"})


def build_single_aqc() -> Family:
    """``H0`` acted on by ``H1``; the output is ``diag(s, 1 - s)``."""
    return Family("single", _single)


def build_aqc_triple() -> tuple[Family, Family, Family]:
    """``(left, middle, right)`` families.

    Middle: ``H' = H0 |> sigma_x`` then ``H_out = H' |> H1``, with ``H1``
    also acting on ``sigma_x``.  Right: the R3 image, passing through
    ``H'' = H0 |> H1``.  Left: ``H0`` made an agent and the ``sigma_x``
    strand routed through ``G`` with ``G |> H0 = sigma_x``.
    """
    return Family("left", _left), Family("middle", _middle), Family("right", _right)


def h_out_closed_form(s) -> Mat:
    return Mat([[s, s * (1 - s)], [s * (1 - s), (1 - s) ** 2]])


def h_prime_closed_form(s) -> Mat:
    return Mat([[0 * s, s], [s, 1 - s]])


def g_closed_form(s) -> Mat:
    return Mat([[0 * s, 1 / (1 - s)], [1 / (1 - s), -s / (1 - s)]])


def default_grid(n: int = 2001) -> list[float]:
    """``n`` points on ``[1e-4, 1 - 1e-4]``, symmetric about 0.5 (hit exactly for odd ``n``)."""
    if n < 2:
        return [0.5]
    h = (GRID_HI - GRID_LO) / (n - 1)
    mid = (n - 1) / 2
    return [0.5 + (i - mid) * h for i in range(n)]


@dataclass
class GapTrajectory:
    register: str
    grid: list
    gaps: list
    fn: Callable = field(repr=False, compare=False, default=None)

    def to_json(self) -> dict:
        return {"register": self.register, "s": self.grid, "gap": self.gaps}


def scan_gaps(family: Family, grid: Sequence[float] | None = None,
              registers: Sequence[str] | None = None) -> list[GapTrajectory]:
    grid = list(grid if grid is not None else default_grid())
    machines = [family(s) for s in grid]
    names = list(registers) if registers is not None else machines[0].registers
    out = []
    for r in names:
        fn = (lambda rr: lambda s: gap(family(float(s)).colors[rr]))(r)
        out.append(GapTrajectory(r, grid, [gap(m.colors[r]) for m in machines], fn))
    return out


def min_gap(traj: GapTrajectory) -> tuple[float, float]:
    """Grid minimum refined by golden-section search on the neighbouring bracket."""
    i = min(range(len(traj.gaps)), key=traj.gaps.__getitem__)
    best = (traj.grid[i], traj.gaps[i])
    if traj.fn is None or i == 0 or i == len(traj.grid) - 1:
        return best
    lo, mid, hi = traj.grid[i - 1], traj.grid[i], traj.grid[i + 1]
    try:
        res = minimize_scalar(traj.fn, bracket=(lo, mid, hi), method="golden",
                              options={"xtol": 1e-12})
    except ValueError:
        return best
    if lo <= res.x <= hi and res.fun < best[1]:
        return float(res.x), float(res.fun)
    return best


@dataclass
class Feasibility:
    feasible: bool
    register: str | None = None
    s_star: float | None = None
    min_gaps: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "Feasible" if self.feasible else "Infeasible"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict,
               "min_gaps": {r: {"s": s, "gap": g} for r, (s, g) in self.min_gaps.items()}}
        if not self.feasible:
            out["register"], out["s_star"] = self.register, self.s_star
        return out


def classify_feasibility(family: Family, grid: Sequence[float] | None = None,
                         threshold: float = DEFAULT_THRESHOLD) -> Feasibility:
    """Infeasible when some register's minimal gap is at most ``threshold``."""
    mins = {t.register: min_gap(t) for t in scan_gaps(family, grid)}
    worst = min(mins, key=lambda r: (mins[r][1], r))
    s_star, g = mins[worst]
    if g <= threshold:
        return Feasibility(False, worst, s_star, mins)
    return Feasibility(True, min_gaps=mins)


def negative_eigenvalue_witness(grid: Sequence[float] | None = None, register: str = "g") -> list[float]:
    """Smallest eigenvalue of ``G(s)`` in the left machine at each grid point."""
    left = build_aqc_triple()[0]
    grid = grid if grid is not None else default_grid()
    return [eigenvalues(to_float(left(s).colors[register]))[0] for s in grid]
