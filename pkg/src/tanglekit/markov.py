"""Iterated machines: concatenated copies, steady states and transition matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .colors import EPS_EQ, Mat, to_float
from .machine import (
    Agent,
    ColoringError,
    Component,
    Inconsistent,
    Machine,
    Underdetermined,
    closure,
    color,
    concatenate,
    endpoints,
    solve_coloring,
    solve_linear,
)
from .moves import MoveSite, apply_move
from .quandle import LinearQuandle, OpLabel, Quandle, dihedral

MAX_FIXED_POINT_STEPS = 100_000
FIXED_POINT_TOL = 1e-10
STOCHASTIC_TOL = 1e-12


class IterationError(ValueError):
    pass


def _is_symbolic(x) -> bool:
    return type(x).__module__.startswith("sympy")


def field_for(*params) -> str:
    if any(_is_symbolic(p) for p in params):
        return "symbolic"
    if all(isinstance(p, (int, Fraction)) for p in params):
        return "rational"
    return "float"


def _scalars(q: Quandle):
    field_ = getattr(q, "field", "rational")
    if field_ == "symbolic":
        import sympy

        return sympy.Integer(1), sympy.Integer(0)
    if field_ == "float":
        return 1.0, 0.0
    return Fraction(1), Fraction(0)


def _check_params(**params):
    for name, s in params.items():
        if not _is_symbolic(s) and (s == 0 or s == 1):
            raise IterationError(f"{name} must differ from 0 and 1, got {s}")


# -- iteration ----------------------------------------------------------------

@dataclass
class IterationSpec:
    """``copies`` copies of ``unit`` joined by ``pairing`` (terminal, initial).

    ``controls`` seeds registers other than the inputs: one mapping used for
    every copy, or a sequence with one mapping per copy.
    """

    unit: Machine
    pairing: list
    copies: int
    inputs: dict
    controls: object = None

    def __post_init__(self):
        self.pairing = [tuple(p) for p in self.pairing]
        initials, terminals = endpoints(self.unit)
        outs = [o for o, _ in self.pairing]
        ins = [i for _, i in self.pairing]
        if len(set(outs)) != len(outs) or len(set(ins)) != len(ins):
            raise IterationError("pairing must be a bijection")
        for o, i in self.pairing:
            if o not in terminals:
                raise IterationError(f"{o!r} is not a terminal register")
            if i not in initials:
                raise IterationError(f"{i!r} is not an initial register")
        if self.copies < 0:
            raise IterationError("copy count must be non-negative")
        if isinstance(self.controls, Sequence) and len(self.controls) != self.copies:
            raise IterationError("need one control mapping per copy")

    @property
    def ins(self) -> list[str]:
        return [i for _, i in self.pairing]

    @property
    def outs(self) -> list[str]:
        return [o for o, _ in self.pairing]

    def controls_for(self, i: int) -> dict:
        if self.controls is None:
            return {}
        if isinstance(self.controls, Mapping):
            return dict(self.controls)
        return dict(self.controls[i])


@dataclass
class Trajectory:
    inputs: list  # In colours of each copy
    final: dict  # Out colours of the last copy

    def vectors(self, ins: Sequence[str], outs: Sequence[str]) -> list[list]:
        """``v_0 .. v_n`` as lists ordered like ``ins`` (and ``outs`` for the last)."""
        return [[d[r] for r in ins] for d in self.inputs] + [[self.final[r] for r in outs]]


def color_unit(m: Machine, seeds: Mapping) -> dict:
    """Full colouring from ``seeds``; linear quandles fall back to an affine solve."""
    try:
        return solve_coloring(m, seeds)
    except Underdetermined:
        if not isinstance(m.quandle, LinearQuandle):
            raise
        sol = solve_linear(m, seeds)
        if sol.particular is None:
            raise ColoringError("seeds admit no colouring")
        if sol.directions:
            raise Underdetermined(sorted({r for d in sol.directions for r, v in d.items() if v != 0}))
        return sol.particular


def iterate(spec: IterationSpec) -> Trajectory:
    """Colour the copies one after another, feeding each Out into the next In."""
    current = {r: spec.unit.quandle.coerce(spec.inputs[r]) for r in spec.ins}
    history = []
    out = {}
    for i in range(spec.copies):
        history.append(dict(current))
        seeds = dict(current)
        seeds.update(spec.controls_for(i))
        try:
            cols = color_unit(spec.unit, seeds)
        except Inconsistent as exc:
            raise IterationError(f"copy {i}: {exc}") from None
        out = {o: cols[o] for o in spec.outs}
        current = {i_: cols[o] for o, i_ in spec.pairing}
    if spec.copies == 0:
        return Trajectory([], {o: current[i] for o, i in spec.pairing})
    return Trajectory(history, out)


def stack(spec: IterationSpec) -> tuple[Machine, dict]:
    """The concatenated machine plus the seeds that colour it like :func:`iterate`.

    Copy ``i`` has registers ``name@i``; a joined pair keeps the name of the
    terminal register of the earlier copy.
    """
    if spec.copies == 0:
        raise IterationError("stack needs at least one copy")
    copies = [spec.unit.relabel({r: f"{r}@{i}" for r in spec.unit.registers}).replace(colors={})
              for i in range(spec.copies)]
    m = copies[0]
    for i in range(1, spec.copies):
        m = concatenate(m, copies[i], [(f"{o}@{i - 1}", f"{n}@{i}") for o, n in spec.pairing])
    seeds = {f"{r}@0": spec.inputs[r] for r in spec.ins}
    for i in range(spec.copies):
        for r, c in spec.controls_for(i).items():
            seeds[_stacked_name(spec, r, i)] = c
    return m, seeds


def _stacked_name(spec: IterationSpec, r: str, i: int) -> str:
    back = {n: o for o, n in spec.pairing}
    if i > 0 and r in back:
        return f"{back[r]}@{i - 1}"
    return f"{r}@{i}"


# -- basic linear iteration -----------------------------------------------------

def basic_unit(s) -> Machine:
    """``x -> x_next`` acted on by the control register ``u`` with ``|>_s``."""
    q = LinearQuandle(field_for(s))
    return Machine(q, [Component("path", ["x", "x_next"]), Component("path", ["u"])],
                   {"u": Agent(OpLabel("linear", s), [("x", 1)])})


def basic_iteration(s, u: Sequence) -> IterationSpec:
    """``x_{0:0} = u_0`` and ``x_{0:i} = x_{0:i-1} |>_s u_i``."""
    n = len(u) - 1
    return IterationSpec(basic_unit(s), [("x_next", "x")], n, {"x": u[0]},
                         [{"u": u[i]} for i in range(1, n + 1)])


def basic_weights(s, n: int) -> list:
    """Coefficients ``w_i`` of ``u_{n-i}`` in ``x_{0:n}``: ``s(1-s)^i`` then ``(1-s)^n``."""
    return [s * (1 - s) ** i for i in range(n)] + [(1 - s) ** n]


def impulse_response(s, n: int) -> list:
    """``x_{0:n}`` for a unit input at each position, indexed like :func:`basic_weights`."""
    one = Fraction(1) if field_for(s) == "rational" else 1.0
    out = [None] * (n + 1)
    for j in range(n + 1):
        u = [one * 0] * (n + 1)
        u[j] = one
        x = iterate(basic_iteration(s, u)).final["x_next"]
        out[n - j] = x
    return out


# -- transition matrices ----------------------------------------------------

def _numeric(x) -> bool:
    if _is_symbolic(x):
        return not x.free_symbols
    return isinstance(x, (int, float, Fraction))


def _leq(a, b, tol) -> bool:
    return a <= b + tol


def _close(a, b, tol) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= tol
    return a == b


@dataclass(frozen=True)
class TransitionMatrix:
    """Dense matrix with stochasticity flags computed from its entries.

    Flags are ``None`` when some entry is symbolic.
    """

    rows: tuple

    def __init__(self, rows):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in (rows.rows if isinstance(rows, Mat) else rows)))

    @property
    def mat(self) -> Mat:
        return Mat(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def _tol(self):
        return STOCHASTIC_TOL if any(isinstance(x, float) for r in self.rows for x in r) else 0

    @property
    def row_stochastic(self) -> bool | None:
        if not all(_numeric(x) for r in self.rows for x in r):
            return None
        tol = self._tol()
        return all(_leq(0, x, tol) for r in self.rows for x in r) and all(_close(sum(r), 1, tol) for r in self.rows)

    @property
    def doubly_stochastic(self) -> bool | None:
        rs = self.row_stochastic
        if rs is None:
            return None
        tol = self._tol()
        cols = zip(*self.rows)
        return rs and all(_close(sum(c), 1, tol) for c in cols)

    def out_of_range(self):
        """First ``(i, j, value)`` outside ``[0, 1]``, row-major, or ``None``."""
        tol = self._tol()
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if not (_leq(0, x, tol) and _leq(x, 1, tol)):
                    return i, j, x
        return None

    def to_float(self) -> list[list[float]]:
        return [[float(to_float(x)) for x in r] for r in self.rows]

    def to_json(self) -> dict:
        from .io import encode_color

        return {"rows": [[encode_color(x) for x in r] for r in self.rows],
                "row_stochastic": self.row_stochastic, "doubly_stochastic": self.doubly_stochastic}


def relation(m: Machine, sources: Sequence[str], targets: Sequence[str]) -> Mat:
    """Matrix ``R`` with ``targets = R sources`` forced by the edge relations of ``m``.

    Computed column by column from unit seeds on ``sources``; every target
    must be determined by them.
    """
    one, zero = _scalars(m.quandle)
    cols = []
    for j in sources:
        seeds = {r: (one if r == j else zero) for r in sources}
        sol = solve_linear(m, seeds)
        if sol.particular is None:
            raise IterationError(f"no colouring with a unit seed on {j!r}")
        for d in sol.directions:
            free = [t for t in targets if t in d and not _is_zero(d[t])]
            if free:
                raise IterationError(f"{free} not determined by {list(sources)}")
        cols.append([_simplify(sol.particular[t]) for t in targets])
    return Mat([[cols[j][i] for j in range(len(sources))] for i in range(len(targets))])


def _is_zero(x) -> bool:
    if _is_symbolic(x):
        import sympy

        return sympy.simplify(x) == 0
    if isinstance(x, float):
        return abs(x) <= EPS_EQ
    return x == 0


def _simplify(x):
    if _is_symbolic(x):
        import sympy

        return sympy.simplify(x)
    return x


def submachine(m: Machine, registers: Sequence[str]) -> Machine:
    """Registers ``registers`` with the edges between them.

    Agents outside the set that act on a kept edge come along as
    one-register paths so the kept edges keep their relations.
    """
    keep = set(registers)
    comps, runs = [], {}
    for c in m.components:
        if c.kind == "cycle" and all(r in keep for r in c.registers):
            comps.append(Component("cycle", c.registers))
            continue
        run = []
        for r in c.registers:
            if r in keep:
                run.append(r)
            elif run:
                comps.append(Component("path", run))
                run = []
        if run:
            comps.append(Component("path", run))
    for c in comps:
        for i, r in enumerate(c.registers):
            runs[r] = c.registers[(i + 1) % len(c.registers)] if (c.kind == "cycle" or i + 1 < len(c.registers)) else None
    agents = {}
    for u, ag in m.agents.items():
        pts = [(t, f) for t, f in ag.patients if t in keep and runs.get(t) == m.next(t)]
        if u in keep or pts:
            agents[u] = Agent(ag.op, pts)
            if u not in keep:
                comps.append(Component("path", [u]))
                keep.add(u)
    return Machine(m.quandle, comps, agents)


# -- steady states ----------------------------------------------------------

@dataclass
class SteadyState:
    """Colours ``pi`` on the In registers with In = Out under closure.

    ``directions`` spans the rest of the solution set (empty for a point).
    """

    method: str  # "closure" or "iteration"
    point: dict
    directions: list = field(default_factory=list)
    steps: int = 0

    @property
    def kind(self) -> str:
        return {0: "point", 1: "line"}.get(len(self.directions), f"affine-{len(self.directions)}")

    def to_json(self) -> dict:
        from .io import encode_color

        return {"method": self.method, "kind": self.kind,
                "point": {r: encode_color(c) for r, c in self.point.items()},
                "directions": [{r: encode_color(c) for r, c in d.items()} for d in self.directions],
                "steps": self.steps}


@dataclass
class FixedPointRun:
    converged: bool
    state: dict
    steps: int
    period: int | None = None  # length of a detected cycle


def fixed_point(spec: IterationSpec, max_steps: int = MAX_FIXED_POINT_STEPS,
                tol: float = FIXED_POINT_TOL) -> FixedPointRun:
    """Iterate the unit map on In colours until it stops moving or revisits a state."""
    q = spec.unit.quandle
    state = {r: q.coerce(spec.inputs[r]) for r in spec.ins}
    seen = {}
    exact = all(not isinstance(v, float) for v in state.values())
    for step in range(max_steps):
        seeds = dict(state)
        seeds.update(spec.controls_for(0) if isinstance(spec.controls, Mapping) else {})
        cols = color_unit(spec.unit, seeds)
        nxt = {i: cols[o] for o, i in spec.pairing}
        if all(q.equal(nxt[r], state[r]) if exact else abs(to_float(nxt[r]) - to_float(state[r])) <= tol
               for r in spec.ins):
            return FixedPointRun(True, state, step)
        if exact:
            key = tuple(repr(state[r]) for r in spec.ins)
            if key in seen:
                return FixedPointRun(False, state, step, step - seen[key])
            seen[key] = step
        state = nxt
    return FixedPointRun(False, state, max_steps)


def steady_state(spec: IterationSpec) -> SteadyState | None:
    """Solve the closure of the unit; non-linear carriers are iterated instead."""
    if isinstance(spec.unit.quandle, LinearQuandle):
        closed = closure(spec.unit, spec.pairing)
        seeds = spec.controls_for(0) if isinstance(spec.controls, Mapping) else {}
        sol = solve_linear(closed, seeds)
        if sol.particular is None:
            return None
        point = {i: sol.particular[o] for o, i in spec.pairing}
        dirs = [{i: d.get(o, 0 * sol.particular[o]) for o, i in spec.pairing} for d in sol.directions]
        return SteadyState("closure", point, dirs)
    run = fixed_point(spec)
    if not run.converged:
        return None
    return SteadyState("iteration", run.state, steps=run.steps)


# -- Markov unit and its stacked variants ---------------------------------------

MARKOV_IN = ["v1_in", "v2_in"]
MARKOV_OUT = ["v1_out", "v2_out"]
MARKOV_PAIRING = [("v1_out", "v1_in"), ("v2_out", "v2_in")]


def _linear_quandle(*params) -> LinearQuandle:
    return LinearQuandle(field_for(*params))


def markov_machine(s1, s2) -> Machine:
    """``v1' = v1 |>_2 v2`` and ``v2' = v2 |>_1 v1``, both agents being inputs."""
    _check_params(s1=s1, s2=s2)
    return Machine(
        _linear_quandle(s1, s2),
        [Component("path", ["v1_in", "v1_out"]), Component("path", ["v2_in", "v2_out"])],
        {"v2_in": Agent(OpLabel("linear", s2), [("v1_in", 1)]),
         "v1_in": Agent(OpLabel("linear", s1), [("v2_in", 1)])},
    )


def markov_unit(s1, s2) -> tuple[Machine, TransitionMatrix]:
    """The unit machine and ``P`` read off its colourings."""
    m = markov_machine(s1, s2)
    return m, TransitionMatrix(relation(m, MARKOV_IN, MARKOV_OUT))


def markov_iteration(s1, s2, v0: Sequence, copies: int) -> IterationSpec:
    return IterationSpec(markov_machine(s1, s2), MARKOV_PAIRING, copies, dict(zip(MARKOV_IN, v0)))


def markov_matrix(s1, s2) -> Mat:
    return Mat([[1 - s2, s2], [s1, 1 - s1]])


def _two_copies(s1, s2, q: Quandle, ops: dict) -> Machine:
    """Two stacked Markov units: strand ``A`` carries ``v^1``, strand ``C`` carries ``v^2``."""
    return Machine(
        q,
        [Component("path", ["A0", "A1", "A2"]), Component("path", ["C0", "C1", "C2"])],
        {"C0": Agent(ops[2], [("A0", 1)]), "A0": Agent(ops[1], [("C0", 1)]),
         "C1": Agent(ops[2], [("A1", 1)]), "A1": Agent(ops[1], [("C1", 1)])},
    )


def feed_forward_moves(s3) -> list[MoveSite]:
    """Moves turning two stacked units into the feed-forward block.

    A new agent ``C1'`` with ``|>_3`` is split off the ``v^2`` strand between
    the copies, pushed across both strands of the second copy by two R2
    moves, and the two interactions of the second copy are then slid past
    it with R3 moves.
    """
    return [
        MoveSite("Stab+", "C1", side="before", variant="edge"),
        MoveSite("Stab+", "C1'", op=OpLabel("linear", s3), variant="agent"),
        MoveSite("R2+", "A1", agent="C1'", side="before", sign=-1),
        MoveSite("R2+", "C2", agent="C1'", side="before", sign=-1),
        MoveSite("R3", "A1", agent="C1'", partner="A1'", choices=(("C1", "C2''"),)),
        MoveSite("R3", "C1", agent="C1'", partner="C2''", choices=(("A1", "A1"),)),
    ]


FEED_FORWARD_NAMES = {"A0": "v1_0", "C0": "v2_0", "A1'": "v1_1", "C2''": "v2_1", "A2": "v1_2",
                      "C2": "v2_2", "C1'": "x3", "A1''": "p1", "A1": "q1", "C1": "p2", "C2'": "q2"}
BLOCK_IN = ["v1_0", "v2_0"]
BLOCK_CUT = ["v1_1", "v2_1"]
BLOCK_OUT = ["v1_2", "v2_2"]
BLOCK_PAIRING = [("v1_2", "v1_0"), ("v2_2", "v2_0")]
# second copy plus the stretch x3 -> p2 -> v2_1 that ties the agent to the cut
FEED_FORWARD_SECOND = ["v1_1", "q1", "v1_2", "x3", "p2", "v2_1", "q2", "v2_2"]


def stacked_pair(s1, s2, s3=None) -> Machine:
    """Two stacked Markov units, coloured from ``v_0 = (1, 0)``."""
    params = (s1, s2) if s3 is None else (s1, s2, s3)
    q = _linear_quandle(*params)
    one, zero = _scalars(q)
    m = _two_copies(s1, s2, q, {1: OpLabel("linear", s1), 2: OpLabel("linear", s2)})
    return color(m, {"A0": one, "C0": zero})


def feed_forward_machine(s1, s2, s3) -> Machine:
    m = stacked_pair(s1, s2, s3)
    for site in feed_forward_moves(s3):
        m = apply_move(m, site)
    return m.relabel(FEED_FORWARD_NAMES)


@dataclass
class FeedForward:
    machine: Machine
    P0: TransitionMatrix
    P1: TransitionMatrix
    two_step: Mat
    order: str  # composition reproducing the two-step map: "P1P0", "P0P1" or "both"


def _order(P0: Mat, P1: Mat, two: Mat, equal) -> str:
    a, b = equal(P1 @ P0, two), equal(P0 @ P1, two)
    return "both" if a and b else "P1P0" if a else "P0P1" if b else "neither"


def mats_equal(a: Mat, b: Mat, tol: float = 1e-12) -> bool:
    for ra, rb in zip(a.rows, b.rows):
        for x, y in zip(ra, rb):
            d = x - y
            if _is_symbolic(d):
                import sympy

                if sympy.simplify(d) != 0:
                    return False
            elif abs(d) > tol:
                return False
    return True


def feed_forward_unit(s1, s2, s3) -> FeedForward:
    """Feed-forward block with ``P0`` (inputs to cut) and ``P1`` (cut to outputs)."""
    _check_params(s1=s1, s2=s2, s3=s3)
    m = feed_forward_machine(s1, s2, s3)
    P0 = relation(m, BLOCK_IN, BLOCK_CUT)
    P1 = relation(submachine(m, FEED_FORWARD_SECOND), BLOCK_CUT, BLOCK_OUT)
    two = relation(m, BLOCK_IN, BLOCK_OUT)
    return FeedForward(m, TransitionMatrix(P0), TransitionMatrix(P1), two, _order(P0, P1, two, mats_equal))


def displayed_feed_forward(s1, s2, s3) -> tuple[Mat, Mat]:
    """Closed forms of ``P0`` and ``P1`` for the feed-forward block."""
    k = 1 / (1 - s3)
    P0 = Mat([[(1 - s2 - s1 * s3) * k, (s2 - s3 + s1 * s3) * k], [s1, 1 - s1]])
    return P0, displayed_p1(s1, s2, s3)


def displayed_p1(s1, s2, s3) -> Mat:
    return Mat([[(1 - s2) * (1 - s3), s2 * (1 - s3) + s3],
                [s1 * (1 - s3), (1 - s1) * (1 - s3) + s3]])


def displayed_feed_back(s1, s2, s3) -> tuple[Mat, Mat, Mat]:
    """Closed forms ``(P1, P0'', T)`` for the feed-back block."""
    k = 1 / (1 - s3)
    P0dd = Mat([[(1 - s2) * k, s2 * k], [s1 * k, (1 - s1) * k]])
    T = Mat([[0 * s3, -s3 * k], [0 * s3, -s3 * k]])
    return displayed_p1(s1, s2, s3), P0dd, T


def feed_back_machine(s1, s2, s3) -> Machine:
    """The last ``v^2`` register ``v2_2`` acts with ``|>_3``.

    It acts inversely on both output edges of the first copy and forward on
    both output edges of the second, its own incoming edge included.
    """
    _check_params(s1=s1, s2=s2, s3=s3)
    q = _linear_quandle(s1, s2, s3)
    o1, o2, o3 = (OpLabel("linear", s) for s in (s1, s2, s3))
    return Machine(
        q,
        [Component("path", ["v1_0", "a1", "v1_1", "a2", "v1_2"]),
         Component("path", ["v2_0", "c1", "v2_1", "c2", "v2_2"])],
        {"v2_0": Agent(o2, [("v1_0", 1)]), "v1_0": Agent(o1, [("v2_0", 1)]),
         "v2_1": Agent(o2, [("v1_1", 1)]), "v1_1": Agent(o1, [("v2_1", 1)]),
         "v2_2": Agent(o3, [("a1", -1), ("c1", -1), ("a2", 1), ("c2", 1)])},
    )


def feed_back_moves(s3) -> list[MoveSite]:
    """Moves turning two stacked units into :func:`feed_back_machine`.

    The last ``v^2`` register becomes a ``|>_3`` agent, two R2 moves put
    cancelling crossings on both strands of the second copy, and R3 moves
    carry the inverse crossings back past the second copy's interactions.
    """
    return [
        MoveSite("Stab+", "C2", op=OpLabel("linear", s3), variant="agent"),
        MoveSite("R2+", "C1", agent="C2", side="after", sign=-1),
        MoveSite("R2+", "A1", agent="C2", side="after", sign=-1),
        MoveSite("R3", "C1", agent="C2", partner="C1'", choices=(("A1''", "A1''"),)),
        MoveSite("R3", "A1", agent="C2", partner="A1'", choices=(("C1''", "C1''"),)),
    ]


FEED_BACK_NAMES = {"A0": "v1_0", "A1": "a1", "A1'": "v1_1", "A1''": "a2", "A2": "v1_2",
                   "C0": "v2_0", "C1": "c1", "C1'": "v2_1", "C1''": "c2", "C2": "v2_2"}


def feed_back_from_moves(s1, s2, s3) -> Machine:
    m = stacked_pair(s1, s2, s3)
    for site in feed_back_moves(s3):
        m = apply_move(m, site)
    return m.relabel(FEED_BACK_NAMES)


FEED_BACK_FIRST = ["v1_0", "a1", "v1_1", "v2_0", "c1", "v2_1"]
FEED_BACK_SECOND = ["v1_1", "a2", "v1_2", "v2_1", "c2", "v2_2"]


@dataclass
class FeedBack:
    machine: Machine
    P1: TransitionMatrix  # closed form shared with the feed-forward block
    P0dd: TransitionMatrix
    T: TransitionMatrix
    composite: Mat  # (I - P1 T)^-1 P1 P0''
    two_step: Mat  # read off the machine
    P1_machine: TransitionMatrix  # second copy's own relation
    composite_machine: Mat  # composite with P1_machine in place of P1


def _composite(P1: Mat, T: Mat, P0dd: Mat) -> Mat:
    n = P1.shape[0]
    one = P1[0, 0] * 0 + 1
    ident = Mat([[one if i == j else one * 0 for j in range(n)] for i in range(n)])
    return (ident - P1 @ T).inverse() @ P1 @ P0dd


def feed_back_unit(s1, s2, s3) -> FeedBack:
    """Feed-back block.

    ``P0''`` and ``T`` come from the first copy, whose outputs satisfy
    ``v_1 = P0'' v_0 + T v_2``.  ``P1`` is the closed form shared with the
    feed-forward block; the composite built from it is returned as is.
    The second copy's own relation and the two-step map are read off the
    machine for comparison.
    """
    m = feed_back_machine(s1, s2, s3)
    first = relation(submachine(m, FEED_BACK_FIRST), BLOCK_IN + ["v2_2"], BLOCK_CUT)
    P0dd = Mat([r[:2] for r in first.rows])
    zero = first[0, 0] * 0
    T = Mat([[zero, r[2]] for r in first.rows])
    P1m = relation(submachine(m, FEED_BACK_SECOND), BLOCK_CUT, BLOCK_OUT)
    two = relation(m, BLOCK_IN, BLOCK_OUT)
    P1 = displayed_p1(s1, s2, s3)
    return FeedBack(m, TransitionMatrix(P1), TransitionMatrix(P0dd), TransitionMatrix(T),
                    _simplified(_composite(P1, T, P0dd)), two, TransitionMatrix(P1m),
                    _simplified(_composite(P1m, T, P0dd)))


def _simplified(m: Mat) -> Mat:
    return Mat([[_simplify(x) for x in r] for r in m.rows])


@dataclass
class Stability:
    stable: bool
    witness: tuple | None = None  # (matrix name, i, j, value)

    @property
    def verdict(self) -> str:
        return "Stable" if self.stable else "Unstable"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.witness is not None:
            name, i, j, v = self.witness
            out["witness"] = {"matrix": name, "entry": [i, j], "value": float(to_float(v))}
        return out


def internal_stability(matrices: Mapping[str, TransitionMatrix]) -> Stability:
    """Stable iff every one-step matrix is row-stochastic."""
    for name, P in matrices.items():
        if P.row_stochastic:
            continue
        bad = P.out_of_range()
        if bad is None:  # entries fine, some row sum is off
            i = next(i for i, r in enumerate(P.rows) if not _close(sum(r), 1, P._tol()))
            bad = (i, None, sum(P.rows[i]))
        return Stability(False, (name,) + bad)
    return Stability(True)


# -- Kauffman's trefoil iteration ------------------------------------------

KAUFFMAN_PAIRING = [("B1", "A0"), ("A2", "B0")]


def kauffman_unit(p: int) -> Machine:
    """Trefoil long knot over the dihedral quandle ``a |> b = 2b - a`` mod ``p``."""
    op = OpLabel("table", "R")
    return Machine(
        dihedral(p),
        [Component("path", ["A0", "A1", "A2"]), Component("path", ["B0", "B1"])],
        {"B0": Agent(op, [("A0", 1)]), "A1": Agent(op, [("B0", 1)]), "B1": Agent(op, [("A1", 1)])},
    )


def kauffman_iteration(p: int, a: int, b: int, copies: int = 1) -> IterationSpec:
    return IterationSpec(kauffman_unit(p), KAUFFMAN_PAIRING, copies, {"A0": a, "B0": b})


def kauffman_steady(p: int, a: int, b: int) -> bool:
    return steady_state(kauffman_iteration(p, a, b)) is not None
