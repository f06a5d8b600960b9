"""Entropy-coloured machines: fusion, capacities and local optimality."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .colors import color_key
from .machine import Agent, Component, Machine, color
from .moves import MoveSite, apply_move
from .quandle import LinearQuandle, OpLabel


class SpecError(ValueError):
    pass


def fuse_entropy(h0, h1, s):
    """Entropy after fusing source ``h1`` into ``h0`` with weight ``s``."""
    return (1 - s) * h0 + s * h1


def interaction_capacity(in_colour, out_colour):
    return in_colour - out_colour


def mutual_information(h1, h1_given):
    if not (h1 >= h1_given >= 0):
        raise SpecError(f"not a valid entropy pair: H={h1}, conditional={h1_given}")
    return h1 - h1_given


@dataclass(frozen=True)
class EntropySpec:
    """Source entropies (bits/symbol) and the conditionals that fix ``t`` and ``s``.

    ``H1g0`` is optional; when given, interactions of ``X1`` with ``X0`` alone
    are judged against it.
    """

    H0: object
    H1: object
    H2: object
    H1g2: object
    H1g02: object
    H1g0: object = None

    def check(self) -> None:
        if not self.H1g2 > self.H2:
            raise SpecError("need H(1|2) > H(2)")
        if not self.H1 > self.H1g2:
            raise SpecError("need H(1) > H(1|2) so that t > 0")
        if not self.H1g2 >= self.H1g02:
            raise SpecError("need H(1|0,2) <= H(1|2)")
        if not self.H1g02 > self.h0t2:
            raise SpecError("need H(1|0,2) > H(0) |>_t H(2)")
        if any(h < 0 for h in (self.H0, self.H1, self.H2, self.H1g2, self.H1g02)):
            raise SpecError("entropies must be non-negative")

    @property
    def t(self):
        return (self.H1 - self.H1g2) / (self.H1 - self.H2)

    @property
    def h0t2(self):
        return fuse_entropy(self.H0, self.H2, self.t)

    @property
    def s(self):
        return (self.H1g2 - self.H1g02) / (self.H1g2 - self.h0t2)

    def conditionals(self) -> dict:
        """``(input, agent) -> optimal output`` for the interactions these entropies cover."""
        out = {
            (self.H1, self.H2): self.H1g2,
            (self.H1g2, self.h0t2): self.H1g02,
        }
        if self.H1g0 is not None:
            out[(self.H1, self.H0)] = self.H1g0
        return out


DEMO_SPEC = EntropySpec(Fraction(1, 2), Fraction(1), Fraction(3, 10), Fraction(3, 5), Fraction(9, 20))


class InteractionClass(enum.Enum):
    OPTIMAL = "Optimal"
    SUBOPTIMAL = "Suboptimal"
    ABSTRACT = "Abstract"


def build_capacity_triple(spec: EntropySpec, quandle: LinearQuandle | None = None):
    """``(left, middle, right)`` equivalent machines plus the move sites used.

    The right machine fuses ``X2`` into ``X1`` and ``X0`` with ``|>_t`` and
    then ``X0 |>_t X2`` into ``X1 | X2`` with ``|>_s``.  One R3 gives the
    middle machine, whose ``X1`` strand passes through ``H(1) |>_s H(0)``;
    an R2 on the ``X1`` strand gives the left machine with the register
    ``H(1)`` acted on inversely by ``H(0)``.
    """
    spec.check()
    exact = all(isinstance(v, (int, Fraction)) for v in (spec.H0, spec.H1, spec.H2, spec.H1g2, spec.H1g02))
    quandle = quandle or LinearQuandle("rational" if exact else "float")
    op_t, op_s = OpLabel("linear", spec.t), OpLabel("linear", spec.s)
    right = Machine(
        quandle,
        [
            Component("path", ["h1", "h1g2", "h1g02"]),
            Component("path", ["h0", "h0t2"]),
            Component("path", ["h2"]),
        ],
        {
            "h2": Agent(op_t, [("h1", 1), ("h0", 1)]),
            "h0t2": Agent(op_s, [("h1g2", 1)]),
        },
        {"h1": spec.H1, "h0": spec.H0, "h2": spec.H2},
    )
    right = color(right)
    r3 = MoveSite("R3", "h0t2", agent="h2", partner="h0", choices=(("h1g2", "h1g2"),))
    middle = apply_move(right, r3)
    r2 = MoveSite("R2+", "h1", agent="h0", side="before", sign=-1)
    left = apply_move(middle, r2)
    # readable names for the registers the moves introduced or recoloured
    middle = middle.relabel({"h1g2": "h1s0"})
    left = left.relabel({"h1g2": "h1s0", "h1'": "g", "h1''": "h1in"})
    return (left, middle, right), (r3, r2)


def global_capacity(m: Machine) -> list:
    """Sorted ``initial - terminal`` colour over all path processes."""
    caps = [m.colors[c.registers[0]] - m.colors[c.registers[-1]] for c in m.components if c.kind == "path"]
    return sorted(caps)


@dataclass
class InteractionReport:
    agent: str
    cls: InteractionClass
    capacities: list  # (tail, head, capacity)

    def to_json(self) -> dict:
        return {"agent": self.agent, "class": self.cls.value,
                "capacities": [{"edge": [t, h], "capacity": str(c) if isinstance(c, Fraction) else c}
                               for t, h, c in self.capacities]}


def interaction_capacities(m: Machine, agent: str) -> list:
    out = []
    for t, _ in m.agents[agent].patients:
        h = m.next(t)
        out.append((t, h, interaction_capacity(m.colors[t], m.colors[h])))
    return out


def classify_interactions(m: Machine, conditionals: Mapping | None = None,
                          admissible=(0, 1)) -> dict:
    """Class of every interaction (agent with its patient edges).

    Abstract when any register involved leaves ``admissible``; Suboptimal
    when a covered ``(input, agent)`` pair does not produce the conditional
    entropy; Optimal otherwise.
    """
    lo, hi = admissible
    cond = {(color_key(i), color_key(a)): o for (i, a), o in (conditionals or {}).items()}
    out = {}
    for u in sorted(m.agents):
        ag = m.agents[u]
        y = m.colors[u]
        regs = [u]
        cls = InteractionClass.OPTIMAL
        for t, _ in ag.patients:
            regs += [t, m.next(t)]
        if any(not (lo <= m.colors[r] <= hi) for r in regs):
            cls = InteractionClass.ABSTRACT
        else:
            for t, _ in ag.patients:
                want = cond.get((color_key(m.colors[t]), color_key(y)))
                if want is not None and not m.quandle.equal(m.colors[m.next(t)], want):
                    cls = InteractionClass.SUBOPTIMAL
        out[u] = InteractionReport(u, cls, interaction_capacities(m, u))
    return out
