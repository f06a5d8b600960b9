"""Small reference machines and a seeded random machine generator."""
from __future__ import annotations

import random
from fractions import Fraction

from .machine import Agent, Component, Machine, color, solve_linear
from .quandle import LinearQuandle, OpLabel, Quandle, linear


def single_interaction(x, y, op: OpLabel | None = None, quandle: Quandle | None = None,
                       colored: bool = True) -> Machine:
    """Patient ``x -> x |> y`` acted on by agent ``y`` (a one-register path)."""
    quandle = quandle or LinearQuandle("rational")
    op = op or linear(Fraction(1, 2))
    m = Machine(
        quandle,
        [Component("path", ["x", "out"]), Component("path", ["y"])],
        {"y": Agent(op, [("x", 1)])},
        {"x": x, "y": y},
    )
    return color(m) if colored else m


def kink(x, op: OpLabel | None = None, quandle: Quandle | None = None) -> Machine:
    """Single interaction whose agent is its own input register, so ``x |> x``."""
    quandle = quandle or LinearQuandle("rational")
    op = op or linear(Fraction(1, 2))
    m = Machine(quandle, [Component("path", ["x", "out"])], {"x": Agent(op, [("x", 1)])}, {"x": x})
    return color(m)


def toy_machines(X, Y, Z, s, t, quandle: Quandle | None = None) -> tuple[Machine, Machine]:
    """The two three-stream fusion networks.

    Left: ``z`` fuses into both ``x`` and ``y`` with ``|>_s`` and then
    ``y |>_s z`` fuses into ``x |>_s z`` with ``|>_t``.  Right: ``y`` fuses
    into ``x`` with ``|>_t`` first and ``z`` then acts on both strands.
    """
    quandle = quandle or LinearQuandle("rational")
    op_s, op_t = linear(s), linear(t)
    comps = [Component("path", ["x0", "x1", "x2"]), Component("path", ["y0", "y1"]),
             Component("path", ["z"])]
    seeds = {"x0": X, "y0": Y, "z": Z}
    left = Machine(quandle, comps, {
        "z": Agent(op_s, [("x0", 1), ("y0", 1)]),
        "y1": Agent(op_t, [("x1", 1)]),
    }, seeds)
    right = Machine(quandle, comps, {
        "y0": Agent(op_t, [("x0", 1)]),
        "z": Agent(op_s, [("x1", 1), ("y0", 1)]),
    }, seeds)
    return color(left), color(right)


DEFAULT_PARAMS = (Fraction(1, 3), Fraction(1, 2), Fraction(3, 2), Fraction(-1))


def random_machine(rng: random.Random, max_registers: int = 12, params=DEFAULT_PARAMS,
                   max_agents: int = 4, act_prob: float = 0.5) -> Machine:
    """Random consistently coloured machine over the rational linear quandle."""
    q = LinearQuandle("rational")
    n = rng.randint(2, max_registers)
    names = [f"r{i}" for i in range(n)]
    comps = []
    i = 0
    while i < n:
        size = rng.randint(1, min(5, n - i))
        kind = "cycle" if rng.random() < 0.2 else "path"
        comps.append(Component(kind, names[i:i + size]))
        i += size
    agent_names = rng.sample(names, rng.randint(0, min(max_agents, n)))
    draft = Machine(q, comps)
    patients: dict[str, list] = {u: [] for u in agent_names}
    if agent_names:
        for t, _h in draft.edges():
            if rng.random() < act_prob:
                patients[rng.choice(agent_names)].append((t, rng.choice((1, -1))))
    agents = {u: Agent(OpLabel("linear", rng.choice(params), rng.random() < 0.3), patients[u])
              for u in agent_names}
    m = Machine(q, comps, agents)
    sol = solve_linear(m, {})
    colors = dict(sol.particular)
    for d in sol.directions:
        k = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        for r, v in d.items():
            colors[r] += k * v
    return m.replace(colors=colors)
