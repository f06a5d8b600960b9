"""Machines as Gauss diagrams: registers on paths and cycles plus agents.

An edge is named by its tail register; its head is the next register along
the component.  An agent owns a set of edges, each with a flag: ``+1`` means
``colour(tail) |> colour(agent) == colour(head)`` and ``-1`` means
``colour(head) |> colour(agent) == colour(tail)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .colors import Mat, Vec
from .quandle import LinearQuandle, OpLabel, Quandle, QuandleError


class MachineError(ValueError):
    """Structural problem: bad component, dangling reference, doubly owned edge."""


class ColoringError(ValueError):
    pass


class Underdetermined(ColoringError):
    def __init__(self, unresolved: Sequence[str]):
        self.unresolved = list(unresolved)
        super().__init__(f"colours not determined for {self.unresolved}")


class Inconsistent(ColoringError):
    def __init__(self, register: str, first, second):
        self.register, self.first, self.second = register, first, second
        super().__init__(f"register {register!r} forced to both {first!r} and {second!r}")


@dataclass(frozen=True)
class Component:
    kind: str  # "path" or "cycle"
    registers: tuple

    def __init__(self, kind: str, registers: Iterable[str]):
        if kind not in ("path", "cycle"):
            raise MachineError(f"unknown component kind {kind!r}")
        regs = tuple(registers)
        if not regs:
            raise MachineError("empty component")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "registers", regs)


@dataclass(frozen=True)
class Agent:
    op: OpLabel
    patients: tuple = ()  # ((tail, flag), ...)

    def __init__(self, op: OpLabel, patients: Iterable[tuple[str, int]] = ()):
        pts = tuple((t, int(f)) for t, f in patients)
        for _, f in pts:
            if f not in (1, -1):
                raise MachineError(f"patient flag must be +1 or -1, got {f}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "patients", pts)

    def tails(self) -> list[str]:
        return [t for t, _ in self.patients]


class Machine:
    """Immutable quintuple of graph, agents, edge assignment, operations, colours."""

    def __init__(self, quandle: Quandle, components: Iterable[Component],
                 agents: Mapping[str, Agent] | None = None,
                 colors: Mapping[str, Any] | None = None):
        self.quandle = quandle
        self.components = tuple(components)
        self.agents = dict(agents or {})
        self.colors = {k: quandle.coerce(v) for k, v in (colors or {}).items()}
        self._index()

    @classmethod
    def _raw(cls, quandle, components, agents, colors) -> "Machine":
        """Trusted constructor for already-coerced colours (used by moves)."""
        m = cls.__new__(cls)
        m.quandle = quandle
        m.components = tuple(components)
        m.agents = agents
        m.colors = colors
        m._index()
        return m

    def _index(self):
        self._pos: dict[str, tuple[int, int]] = {}
        for ci, comp in enumerate(self.components):
            for i, r in enumerate(comp.registers):
                if r in self._pos:
                    raise MachineError(f"register {r!r} appears twice")
                self._pos[r] = (ci, i)
        self._owner: dict[str, tuple[str, int]] = {}
        for u, ag in self.agents.items():
            if u not in self._pos:
                raise MachineError(f"agent {u!r} is not a register")
            for t, f in ag.patients:
                if t not in self._pos:
                    raise MachineError(f"agent {u!r} acts on unknown register {t!r}")
                if self.next(t) is None:
                    raise MachineError(f"{t!r} is the terminal register of a path and has no outgoing edge")
                if t in self._owner:
                    raise MachineError(f"edge from {t!r} is acted on by {self._owner[t][0]!r} and {u!r}")
                self._owner[t] = (u, f)
        for r in self.colors:
            if r not in self._pos:
                raise MachineError(f"colour given for unknown register {r!r}")

    # -- structure -------------------------------------------------------
    @property
    def registers(self) -> list[str]:
        return [r for c in self.components for r in c.registers]

    def __contains__(self, r) -> bool:
        return r in self._pos

    def position(self, r: str) -> tuple[int, int]:
        return self._pos[r]

    def component_of(self, r: str) -> Component:
        return self.components[self._pos[r][0]]

    def next(self, r: str) -> str | None:
        ci, i = self._pos[r]
        comp = self.components[ci]
        if i + 1 < len(comp.registers):
            return comp.registers[i + 1]
        return comp.registers[0] if comp.kind == "cycle" else None

    def prev(self, r: str) -> str | None:
        ci, i = self._pos[r]
        comp = self.components[ci]
        if i > 0:
            return comp.registers[i - 1]
        return comp.registers[-1] if comp.kind == "cycle" else None

    def edges(self) -> list[tuple[str, str]]:
        out = []
        for c in self.components:
            for r in c.registers:
                h = self.next(r)
                if h is not None:
                    out.append((r, h))
        return out

    def owner(self, tail: str) -> tuple[str, int] | None:
        """``(agent, flag)`` acting on the edge leaving ``tail``, or ``None``."""
        return self._owner.get(tail)

    def is_agent(self, r: str) -> bool:
        return r in self.agents

    def color(self, r: str):
        return self.colors[r]

    def is_colored(self) -> bool:
        return len(self.colors) == len(self._pos)

    def ops(self) -> list[OpLabel]:
        """Forward op labels in use, in first-seen order."""
        seen = {}
        for ag in self.agents.values():
            seen.setdefault(ag.op.forward().key(), ag.op.forward())
        return list(seen.values())

    # -- derived machines --------------------------------------------------
    def replace(self, components=None, agents=None, colors=None) -> "Machine":
        return Machine(
            self.quandle,
            self.components if components is None else components,
            self.agents if agents is None else agents,
            self.colors if colors is None else colors,
        )

    def with_colors(self, colors: Mapping[str, Any]) -> "Machine":
        merged = dict(self.colors)
        merged.update(colors)
        return self.replace(colors=merged)

    def relabel(self, mapping: Mapping[str, str]) -> "Machine":
        f = lambda r: mapping.get(r, r)
        comps = [Component(c.kind, [f(r) for r in c.registers]) for c in self.components]
        agents = {f(u): Agent(a.op, [(f(t), fl) for t, fl in a.patients]) for u, a in self.agents.items()}
        colors = {f(r): c for r, c in self.colors.items()}
        return Machine(self.quandle, comps, agents, colors)

    def map_colors(self, fn) -> "Machine":
        return self.replace(colors={r: fn(c) for r, c in self.colors.items()})

    def __repr__(self):
        comps = ", ".join(f"{c.kind}{list(c.registers)}" for c in self.components)
        return f"Machine({comps}; agents={sorted(self.agents)})"


# -- colour checks ------------------------------------------------------

@dataclass
class EdgeViolation:
    tail: str
    head: str
    agent: str | None
    expected: Any
    actual: Any

    def describe(self) -> str:
        via = f" via agent {self.agent}" if self.agent else " (no agent)"
        return f"edge {self.tail}->{self.head}{via}: expected {self.expected}, found {self.actual}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    uncolored: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.errors

    def to_json(self) -> dict:
        return {
            "valid": self.ok,
            "violations": [v.describe() for v in self.violations],
            "uncolored": list(self.uncolored),
            "errors": list(self.errors),
        }


def edge_image(m: Machine, tail: str, value=None):
    """Colour the head of ``tail``'s edge must carry given the tail colour."""
    x = m.colors[tail] if value is None else value
    own = m.owner(tail)
    if own is None:
        return x
    u, f = own
    return m.quandle.apply_power(m.agents[u].op, x, m.colors[u], f)


def validate(m: Machine) -> ValidationReport:
    rep = ValidationReport()
    rep.uncolored = [r for r in m.registers if r not in m.colors]
    for t, h in m.edges():
        own = m.owner(t)
        needed = [t, h] + ([own[0]] if own else [])
        if any(r not in m.colors for r in needed):
            continue
        try:
            expected = edge_image(m, t)
        except (QuandleError, ZeroDivisionError) as exc:
            rep.errors.append(f"edge {t}->{h}: {exc}")
            continue
        if not m.quandle.equal(expected, m.colors[h]):
            rep.violations.append(EdgeViolation(t, h, own[0] if own else None, expected, m.colors[h]))
    return rep


def solve_coloring(m: Machine, partial: Mapping[str, Any] | None = None,
                   order: Sequence[str] | None = None) -> dict:
    """Propagate seed colours along edges in both directions.

    Raises :class:`Inconsistent` on a conflict and :class:`Underdetermined`
    when some registers stay unknown.  ``order`` only changes the initial
    worklist order; the result does not depend on it.
    """
    q = m.quandle
    known = {r: q.coerce(c) for r, c in (m.colors if partial is None else partial).items()}
    watchers: dict[str, list[str]] = {r: [] for r in m.registers}
    for t, h in m.edges():
        watchers[t].append(t)
        watchers[h].append(t)
        own = m.owner(t)
        if own:
            watchers[own[0]].append(t)
    work = deque(order if order is not None else m.registers)
    queued = set(work)

    def assign(r, c):
        if r in known:
            if not q.equal(known[r], c):
                raise Inconsistent(r, known[r], c)
            return
        known[r] = c
        if r not in queued:
            queued.add(r)
            work.append(r)

    for r in list(work):
        if r not in known:
            queued.discard(r)
    work = deque(r for r in work if r in known)
    while work:
        r = work.popleft()
        queued.discard(r)
        for t in watchers[r]:
            h = m.next(t)
            own = m.owner(t)
            if own:
                u, f = own
                if u not in known:
                    continue
                op, y = m.agents[u].op, known[u]
                if t in known:
                    assign(h, q.apply_power(op, known[t], y, f))
                if h in known:
                    assign(t, q.apply_power(op, known[h], y, -f))
            else:
                if t in known:
                    assign(h, known[t])
                if h in known:
                    assign(t, known[h])
    missing = [r for r in m.registers if r not in known]
    if missing:
        raise Underdetermined(missing)
    return {r: known[r] for r in m.registers}


def color(m: Machine, seeds: Mapping[str, Any] | None = None) -> Machine:
    """``m`` with the colouring completed from ``seeds`` (default: its own colours)."""
    return m.replace(colors=solve_coloring(m, seeds))


# -- affine colourings ----------------------------------------------------

@dataclass
class LinearSolution:
    """Solution set ``particular + span(directions)`` of a linear-quandle colouring."""

    registers: list
    particular: dict | None
    directions: list

    @property
    def kind(self) -> str:
        if self.particular is None:
            return "empty"
        return {0: "point", 1: "line"}.get(len(self.directions), f"affine-{len(self.directions)}")

    @property
    def dimension(self) -> int | None:
        return None if self.particular is None else len(self.directions)

    def to_json(self) -> dict:
        from .io import encode_color

        out = {"kind": self.kind}
        if self.particular is not None:
            out["particular"] = {r: encode_color(c) for r, c in self.particular.items()}
            out["directions"] = [{r: encode_color(c) for r, c in d.items()} for d in self.directions]
        return out


def solve_linear(m: Machine, partial: Mapping[str, Any] | None = None) -> LinearSolution:
    """Exact solution set for a scalar linear-quandle colouring.

    Every edge relation of a linear quandle is affine in all colours jointly,
    including the agent colour, so feedback loops that defeat propagation are
    handled by one linear solve.
    """
    if not isinstance(m.quandle, LinearQuandle):
        raise QuandleError("affine solve needs a linear quandle")
    q = m.quandle
    seeds = {r: q.coerce(c) for r, c in (m.colors if partial is None else partial).items()}
    unknown = [r for r in m.registers if r not in seeds]
    col = {r: i for i, r in enumerate(unknown)}
    n = len(unknown)
    sample = next(iter(seeds.values()), Fraction(0))
    if isinstance(sample, (Vec, Mat)):
        raise QuandleError("affine solve supports scalar colours only")
    zero = sample * 0
    rows, rhs = [], []

    def term(coeffs, const, r, k):
        if r in col:
            coeffs[col[r]] += k
            return const
        return const - k * seeds[r]

    for t, h in m.edges():
        coeffs = [zero] * n
        const = zero
        own = m.owner(t)
        # head - coef_t * tail - coef_u * agent = 0
        if own is None:
            const = term(coeffs, const, h, 1)
            const = term(coeffs, const, t, -1)
        else:
            u, f = own
            op = m.agents[u].op
            s = op.param
            sign = f * (-1 if op.inverse else 1)
            if sign > 0:  # head = (1-s) tail + s agent
                const = term(coeffs, const, h, 1)
                const = term(coeffs, const, t, -(1 - s))
                const = term(coeffs, const, u, -s)
            else:  # tail = (1-s) head + s agent
                const = term(coeffs, const, t, 1)
                const = term(coeffs, const, h, -(1 - s))
                const = term(coeffs, const, u, -s)
        if n == 0:
            if not q.equal(const, zero):
                return LinearSolution(unknown, None, [])
            continue
        rows.append(coeffs)
        rhs.append(const)
    if n == 0:
        return LinearSolution(unknown, dict(seeds), [])
    from .linalg import solve_affine

    sol = solve_affine(rows or [[zero] * n], rhs or [zero])
    if sol is None:
        return LinearSolution(unknown, None, [])
    part, dirs = sol
    particular = dict(seeds)
    particular.update({r: part[col[r]] for r in unknown})
    particular = {r: particular[r] for r in m.registers}
    directions = [{r: d[col[r]] for r in unknown} for d in dirs]
    return LinearSolution(unknown, particular, directions)


# -- processes ------------------------------------------------------------

@dataclass(frozen=True)
class Process:
    kind: str
    registers: tuple

    @property
    def initial(self) -> str | None:
        return self.registers[0] if self.kind == "path" else None

    @property
    def terminal(self) -> str | None:
        return self.registers[-1] if self.kind == "path" else None

    @property
    def is_control(self) -> bool:
        return self.kind == "cycle"


def processes(m: Machine) -> list[Process]:
    """Paths first, then cycles, each group in component order."""
    paths = [Process("path", c.registers) for c in m.components if c.kind == "path"]
    cycles = [Process("cycle", c.registers) for c in m.components if c.kind == "cycle"]
    return paths + cycles


def endpoints(m: Machine) -> tuple[list[str], list[str]]:
    ps = [p for p in processes(m) if p.kind == "path"]
    return [p.initial for p in ps], [p.terminal for p in ps]


# -- concatenation ----------------------------------------------------------

def disjoint_union(a: Machine, b: Machine) -> Machine:
    clash = set(a.registers) & set(b.registers)
    if clash:
        raise MachineError(f"register names shared by both machines: {sorted(clash)}")
    agents = dict(a.agents)
    agents.update(b.agents)
    colors = dict(a.colors)
    colors.update(b.colors)
    return Machine(a.quandle, a.components + b.components, agents, colors)


def _join(m: Machine, pairs: Sequence[tuple[str, str]]) -> Machine:
    """Identify each terminal ``t`` with the initial register ``i``; ``t`` keeps its name."""
    terms = [t for t, _ in pairs]
    inits = [i for _, i in pairs]
    if len(set(terms)) != len(terms) or len(set(inits)) != len(inits):
        raise MachineError("pairing must be injective on both sides")
    initials, terminals = endpoints(m)
    for t, i in pairs:
        if t not in terminals:
            raise MachineError(f"{t!r} is not a terminal register")
        if i not in initials:
            raise MachineError(f"{i!r} is not an initial register")
    colors = dict(m.colors)
    agents = dict(m.agents)
    rename = {}
    for t, i in pairs:
        ct, ci = colors.get(t), colors.get(i)
        if ct is not None and ci is not None and not m.quandle.equal(ct, ci):
            raise MachineError(f"colour mismatch joining {t!r} ({ct!r}) with {i!r} ({ci!r})")
        if ct is None and ci is not None:
            colors[t] = ci
        colors.pop(i, None)
        if i in agents:
            if t in agents and t != i:
                raise MachineError(f"both {t!r} and {i!r} are agents")
            agents[t] = agents.pop(i)
        rename[i] = t

    # splice paths: follow successor links between components
    comp_of_init = {c.registers[0]: c for c in m.components if c.kind == "path"}
    succ = {}
    for t, i in pairs:
        succ[t] = comp_of_init[i]
    has_pred = {id(comp_of_init[i]) for _, i in pairs}
    new_comps = []
    done = set()
    for c in m.components:
        if c.kind == "cycle":
            new_comps.append(c)
            continue
        if id(c) in has_pred or id(c) in done:
            continue
        regs = list(c.registers)
        done.add(id(c))
        while regs[-1] in succ:
            nxt = succ[regs[-1]]
            if id(nxt) in done:
                break
            done.add(id(nxt))
            regs.extend(nxt.registers[1:])
        new_comps.append(Component("path", regs))
    # remaining components form closed loops
    for c in m.components:
        if c.kind == "path" and id(c) not in done:
            regs = list(c.registers)
            done.add(id(c))
            while regs[-1] in succ:
                nxt = succ[regs[-1]]
                if id(nxt) in done:
                    break
                done.add(id(nxt))
                regs.extend(nxt.registers[1:])
            # regs[-1] pairs back to regs[0]; drop the duplicate
            new_comps.append(Component("cycle", regs[:-1] if len(regs) > 1 else regs))
    f = lambda r: rename.get(r, r)
    agents = {f(u): Agent(a.op, [(f(t), fl) for t, fl in a.patients]) for u, a in agents.items()}
    comps = [Component(c.kind, [f(r) for r in c.registers]) for c in new_comps]
    return Machine(m.quandle, comps, agents, {f(r): c for r, c in colors.items()})


def concatenate(a: Machine, b: Machine, pairing: Sequence[tuple[str, str]]) -> Machine:
    """Join terminals of ``a`` to initials of ``b``; shared names keep ``a``'s id."""
    _, terms = endpoints(a)
    inits, _ = endpoints(b)
    for t, i in pairing:
        if t not in terms:
            raise MachineError(f"{t!r} is not a terminal register of the first machine")
        if i not in inits:
            raise MachineError(f"{i!r} is not an initial register of the second machine")
    return _join(disjoint_union(a, b), pairing)


def closure(m: Machine, pairing: Sequence[tuple[str, str]]) -> Machine:
    """Identify terminals with initials inside one machine (paths become cycles)."""
    return _join(m, pairing)
