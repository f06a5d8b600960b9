"""Reidemeister moves and stabilizations on Gauss diagrams.

Every move is described by a :class:`MoveSite`.  ``enumerate_moves`` lists
the sites applicable to a machine, ``apply_move`` rewrites it and
``inverse_site`` names the site that undoes a move on the result.

Move shapes, with ``r`` an anchor register and ``u`` an agent:

* ``R1+`` inserts a register next to ``r`` that acts on the edge joining
  them (a kink); ``R1-`` removes such a register.
* ``R2+`` inserts two registers next to ``r`` whose edges are both acted on
  by ``u`` with opposite exponents; ``R2-`` removes the middle register and
  merges its neighbours.  The middle register must not be an agent.
* ``R3`` slides agent ``w`` across agent ``u``: every patient edge of ``u``
  next to an edge of ``w`` swaps owner with it, and ``u``'s operation moves
  to ``u'``, the neighbour of ``u`` across an edge of ``w``.
* ``Stab+``/``Stab-`` add or remove an agent acting on nothing
  (``variant="agent"``), or split/merge a register along an edge nobody
  acts on (``variant="edge"``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable

from .machine import Agent, Component, Machine
from .quandle import OpLabel

KINDS = ("R1+", "R1-", "R2+", "R2-", "R3", "Stab+", "Stab-")
NON_INCREASING = ("R1-", "R2-", "R3", "Stab-")


class StaleSiteError(ValueError):
    """The site does not match the machine it is applied to."""


@dataclass(frozen=True)
class MoveSite:
    kind: str
    register: str
    agent: str | None = None
    side: str | None = None
    op: OpLabel | None = None
    sign: int | None = None
    partner: str | None = None
    choices: tuple = ()
    variant: str | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "register": self.register}
        for name in ("agent", "side", "sign", "partner", "variant"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.op is not None:
            out["op"] = self.op.to_json()
        if self.choices:
            out["choices"] = [list(c) for c in self.choices]
        return out

    @property
    def is_stabilization(self) -> bool:
        return self.kind.startswith("Stab")

    @property
    def size_change(self) -> int:
        return {"R1+": 1, "R1-": -1, "R2+": 2, "R2-": -2, "R3": 0}.get(
            self.kind, (1 if self.kind == "Stab+" else -1) if self.variant == "edge" else 0
        )


def fresh_name(m: Machine, base: str, taken: Iterable[str] = ()) -> str:
    taken = set(taken)
    name = base + "'"
    while name in m or name in taken:
        name += "'"
    return name


class _Edit:
    """Mutable scratch copy of a machine used while rewriting."""

    def __init__(self, m: Machine):
        self.m = m
        self.comps = [[c.kind, list(c.registers)] for c in m.components]
        self.agents = {u: [a.op, dict(a.patients)] for u, a in m.agents.items()}
        self.colors = dict(m.colors)
        self.owner = {}
        for u, (_, pts) in self.agents.items():
            for t, f in pts.items():
                self.owner[t] = u

    def _locate(self, r):
        for comp in self.comps:
            if r in comp[1]:
                return comp
        raise KeyError(r)

    def insert(self, r, new, side):
        comp = self._locate(r)
        i = comp[1].index(r)
        comp[1].insert(i + 1 if side == "after" else i, new)

    def remove(self, r):
        comp = self._locate(r)
        comp[1].remove(r)
        self.colors.pop(r, None)

    def set_owner(self, tail, agent, flag):
        self.clear_owner(tail)
        self.agents[agent][1][tail] = flag
        self.owner[tail] = agent

    def clear_owner(self, tail):
        u = self.owner.pop(tail, None)
        if u is not None:
            del self.agents[u][1][tail]

    def rekey(self, old, new):
        """The edge leaving ``old`` now leaves ``new``."""
        u = self.owner.pop(old, None)
        if u is None:
            return
        pts = self.agents[u][1]
        self.agents[u][1] = {(new if t == old else t): f for t, f in pts.items()}
        self.owner[new] = u

    def build(self) -> Machine:
        comps = [Component(k, regs) for k, regs in self.comps]
        agents = {u: Agent(op, pts.items()) for u, (op, pts) in self.agents.items()}
        return Machine._raw(self.m.quandle, comps, agents, self.colors)


def _traversal(m: Machine, a: str, b: str) -> tuple[str, int] | None:
    """Edge joining neighbours ``a`` and ``b`` as ``(tail, direction)``.

    Direction is +1 when walking ``a -> b`` follows the orientation.
    """
    if m.next(a) == b:
        return a, 1
    if m.next(b) == a:
        return b, -1
    return None


def _exponent(m: Machine, a: str, b: str):
    """``(owner, exponent)`` for walking from ``a`` to neighbour ``b``."""
    tr = _traversal(m, a, b)
    if tr is None:
        return None
    tail, d = tr
    own = m.owner(tail)
    if own is None:
        return None, 0
    return own[0], own[1] * d


def _ops_for(m: Machine, ops):
    if ops is not None:
        return list(ops)
    used = m.ops()
    return used if used else list(m.quandle.default_ops())


# -- enumeration ------------------------------------------------------------

def enumerate_moves(m: Machine, kinds: Iterable[str] = KINDS, ops: Iterable[OpLabel] | None = None,
                    stab_variants: Iterable[str] = ("agent", "edge")) -> list[MoveSite]:
    """All applicable sites of the requested kinds, in deterministic order.

    ``+`` moves that introduce an operation draw it from ``ops`` (default:
    the forward operations already used in ``m``).
    """
    kinds = set(kinds)
    stab_variants = set(stab_variants)
    regs = m.registers
    out: list[MoveSite] = []
    op_list = _ops_for(m, ops)
    if "R1-" in kinds:
        out += _r1_minus_sites(m)
    if "R2-" in kinds:
        out += _r2_minus_sites(m)
    if "Stab-" in kinds:
        for u in sorted(m.agents):
            if "agent" in stab_variants and not m.agents[u].patients:
                out.append(MoveSite("Stab-", u, variant="agent"))
        if "edge" in stab_variants:
            for t, h in m.edges():
                if _edge_merge_ok(m, t, h):
                    out.append(MoveSite("Stab-", t, variant="edge"))
    if "R3" in kinds:
        out += _r3_sites(m)
    if "R1+" in kinds:
        for r in regs:
            for side in ("before", "after"):
                for op in op_list:
                    for f in (1, -1):
                        out.append(MoveSite("R1+", r, side=side, op=op, sign=f))
    if "R2+" in kinds:
        for r in regs:
            for u in sorted(m.agents):
                for side in ("before", "after"):
                    for d in (1, -1):
                        out.append(MoveSite("R2+", r, agent=u, side=side, sign=d))
    if "Stab+" in kinds:
        if "agent" in stab_variants:
            for r in regs:
                if r not in m.agents:
                    for op in op_list:
                        out.append(MoveSite("Stab+", r, op=op, variant="agent"))
        if "edge" in stab_variants:
            for r in regs:
                for side in ("before", "after"):
                    out.append(MoveSite("Stab+", r, side=side, variant="edge"))
    return out


def _r1_minus_ok(m: Machine, u: str) -> bool:
    ag = m.agents.get(u)
    if ag is None or len(ag.patients) != 1:
        return False
    t = ag.patients[0][0]
    h = m.next(t)
    return u in (t, h) and t != h


def _r1_minus_sites(m: Machine) -> list[MoveSite]:
    return [MoveSite("R1-", u) for u in sorted(m.agents) if _r1_minus_ok(m, u)]


def _r2_minus_pattern(m: Machine, mid: str):
    """``(agent, a, b, keep, exponent)`` if ``mid`` is the middle of an R2 pattern."""
    if mid in m.agents:
        return None
    a, b = m.prev(mid), m.next(mid)
    if a is None or b is None or a == mid or a == b:
        return None
    o1, o2 = m.owner(a), m.owner(mid)
    if o1 is None or o2 is None or o1[0] != o2[0]:
        return None
    # walking a -> mid -> b: exponents o1[1], o2[1]
    if o1[1] != -o2[1]:
        return None
    a_ag, b_ag = a in m.agents, b in m.agents
    if a_ag and b_ag:
        return None
    keep = b if b_ag else a
    return o1[0], a, b, keep, o1[1]


def _r2_minus_sites(m: Machine) -> list[MoveSite]:
    out = []
    for mid in m.registers:
        pat = _r2_minus_pattern(m, mid)
        if pat:
            out.append(MoveSite("R2-", mid, agent=pat[0]))
    return out


def _edge_merge_ok(m: Machine, t: str, h: str) -> bool:
    return t != h and m.owner(t) is None and not (t in m.agents and h in m.agents)


def _r3_options(m: Machine, u: str, w: str, up: str):
    """Per-patient choices ``[(tail, b), ...]`` for an R3 at ``(u, w, u')``, or ``None``."""
    if u == w or u not in m.agents or w not in m.agents or up in m.agents or up == u:
        return None
    ex = _exponent(m, u, up)
    if ex is None or ex[0] != w:
        return None
    eps = ex[1]
    link_tail = _traversal(m, u, up)[0]
    per_patient = []
    for t, _f in m.agents[u].patients:
        h = m.next(t)
        opts = []
        if t == h:
            return None
        for b, a in ((h, t), (t, h)):
            beyond = m.next(b) if b == h else m.prev(b)
            if beyond is None or b in m.agents or b in (u, up):
                continue
            ow, e = _exponent(m, b, beyond)
            if ow != w or e != eps:
                continue
            btail = _traversal(m, b, beyond)[0]
            if btail == link_tail:
                continue
            opts.append((t, b, a, beyond, btail))
        if not opts:
            return None
        per_patient.append(opts)
    return per_patient


def _r3_combos(per_patient):
    for combo in itertools.product(*per_patient):
        bs = [c[1] for c in combo]
        ends = {c[2] for c in combo} | {c[3] for c in combo}
        btails = [c[4] for c in combo]
        if len(set(bs)) != len(bs) or len(set(btails)) != len(btails) or ends & set(bs):
            continue
        yield combo


def _r3_sites(m: Machine) -> list[MoveSite]:
    out = []
    for u in sorted(m.agents):
        nbrs = []
        for v in (m.prev(u), m.next(u)):
            if v is not None and v != u and v not in nbrs:
                nbrs.append(v)
        for up in nbrs:
            ex = _exponent(m, u, up)
            if ex is None or ex[0] is None:
                continue
            w = ex[0]
            per = _r3_options(m, u, w, up)
            if per is None:
                continue
            for combo in _r3_combos(per):
                choices = tuple(sorted((c[0], c[1]) for c in combo))
                out.append(MoveSite("R3", u, agent=w, partner=up, choices=choices))
    return out


# -- application -------------------------------------------------------------

def apply_move(m: Machine, site: MoveSite) -> Machine:
    """Rewrite ``m`` at ``site``; raises :class:`StaleSiteError` if it does not fit."""
    fn = _APPLY.get(site.kind)
    if fn is None:
        raise StaleSiteError(f"unknown move kind {site.kind!r}")
    try:
        return fn(m, site)
    except KeyError as exc:
        raise StaleSiteError(f"{site.kind} site refers to missing register {exc}") from None


def _apply_r1_plus(m, site):
    r = site.register
    if r not in m or site.op is None or site.sign not in (1, -1) or site.side not in ("before", "after"):
        raise StaleSiteError("malformed R1+ site")
    e = _Edit(m)
    n = fresh_name(m, r)
    e.insert(r, n, site.side)
    e.colors[n] = m.colors[r]
    e.agents[n] = [site.op, {}]
    if site.side == "after":
        e.rekey(r, n)
        e.set_owner(r, n, site.sign)
    else:
        e.set_owner(n, n, site.sign)
    return e.build()


def _apply_r1_minus(m, site):
    u = site.register
    if not _r1_minus_ok(m, u):
        raise StaleSiteError(f"no R1- pattern at {u!r}")
    t = m.agents[u].patients[0][0]
    e = _Edit(m)
    if t == u:  # edge u -> v
        e.clear_owner(u)
    else:  # edge v -> u
        e.clear_owner(t)
        e.rekey(u, t)
    del e.agents[u]
    e.remove(u)
    return e.build()


def _apply_r2_plus(m, site):
    r, u, d, side = site.register, site.agent, site.sign, site.side
    if r not in m or u not in m.agents or d not in (1, -1) or side not in ("before", "after"):
        raise StaleSiteError("malformed R2+ site")
    e = _Edit(m)
    mid = fresh_name(m, r)
    n = fresh_name(m, r, [mid])
    op = m.agents[u].op
    e.colors[mid] = m.quandle.apply_power(op, m.colors[r], m.colors[u], d)
    e.colors[n] = m.colors[r]
    if side == "after":
        e.insert(r, mid, "after")
        e.insert(mid, n, "after")
        e.rekey(r, n)
        e.set_owner(r, u, d)
        e.set_owner(mid, u, -d)
    else:
        e.insert(r, mid, "before")
        e.insert(mid, n, "before")
        e.set_owner(n, u, d)
        e.set_owner(mid, u, -d)
    return e.build()


def _apply_r2_minus(m, site):
    pat = _r2_minus_pattern(m, site.register)
    if pat is None or (site.agent is not None and pat[0] != site.agent):
        raise StaleSiteError(f"no R2- pattern at {site.register!r}")
    u, a, b, keep, _ = pat
    mid = site.register
    e = _Edit(m)
    e.clear_owner(a)
    e.clear_owner(mid)
    e.remove(mid)
    if keep == a:
        e.rekey(b, a)
        e.remove(b)
    else:
        e.remove(a)
    return e.build()


def _apply_r3(m, site):
    u, w, up = site.register, site.agent, site.partner
    per = _r3_options(m, u, w, up) if up is not None else None
    if per is None:
        raise StaleSiteError(f"no R3 pattern at {u!r} under {w!r}")
    wanted = dict(site.choices)
    combo = []
    for opts in per:
        t = opts[0][0]
        pick = [o for o in opts if o[1] == wanted.get(t)]
        if not pick:
            raise StaleSiteError(f"R3 choice for patient {t!r} does not fit")
        combo.append(pick[0])
    if len(wanted) != len(combo) or next(_r3_combos([[c] for c in combo]), None) is None:
        raise StaleSiteError("R3 choices do not form a valid site")
    q = m.quandle
    eps = _exponent(m, u, up)[1]
    op_u = m.agents[u].op
    e = _Edit(m)
    new_up = {}
    for t, b, a, beyond, btail in combo:
        f_u = m.agents[u].patients[[p[0] for p in m.agents[u].patients].index(t)][1]
        f_w = m.owner(btail)[1]
        e.clear_owner(t)
        e.clear_owner(btail)
        e.set_owner(t, w, f_w)
        new_up[btail] = f_u
        e.colors[b] = q.apply_power(m.agents[w].op, m.colors[a], m.colors[w], eps)
    del e.agents[u]
    e.agents[up] = [op_u, {}]
    for btail, f in new_up.items():
        e.set_owner(btail, up, f)
    return e.build()


def _apply_stab_plus(m, site):
    r = site.register
    if r not in m:
        raise StaleSiteError(f"unknown register {r!r}")
    e = _Edit(m)
    if site.variant == "agent":
        if r in m.agents or site.op is None:
            raise StaleSiteError(f"{r!r} is already an agent")
        e.agents[r] = [site.op, {}]
        return e.build()
    if site.variant != "edge" or site.side not in ("before", "after"):
        raise StaleSiteError("malformed Stab+ site")
    n = fresh_name(m, r)
    e.insert(r, n, site.side)
    e.colors[n] = m.colors[r]
    if site.side == "after":
        e.rekey(r, n)
    return e.build()


def _apply_stab_minus(m, site):
    r = site.register
    e = _Edit(m)
    if site.variant == "agent":
        if r not in m.agents or m.agents[r].patients:
            raise StaleSiteError(f"{r!r} is not an agent acting on nothing")
        del e.agents[r]
        return e.build()
    h = m.next(r)
    if site.variant != "edge" or h is None or not _edge_merge_ok(m, r, h):
        raise StaleSiteError(f"cannot merge across the edge leaving {r!r}")
    if h in m.agents:
        e.remove(r)
    else:
        e.rekey(h, r)
        e.remove(h)
    return e.build()


_APPLY = {
    "R1+": _apply_r1_plus,
    "R1-": _apply_r1_minus,
    "R2+": _apply_r2_plus,
    "R2-": _apply_r2_minus,
    "R3": _apply_r3,
    "Stab+": _apply_stab_plus,
    "Stab-": _apply_stab_minus,
}


def inverse_site(m: Machine, site: MoveSite) -> MoveSite:
    """The site in ``apply_move(m, site)`` that undoes ``site``."""
    k = site.kind
    if k == "R1+":
        return MoveSite("R1-", fresh_name(m, site.register))
    if k == "R1-":
        u = site.register
        t = m.agents[u].patients[0][0]
        op = m.agents[u].op
        f = m.agents[u].patients[0][1]
        if t == u:
            return MoveSite("R1+", m.next(u), side="before", op=op, sign=f)
        return MoveSite("R1+", t, side="after", op=op, sign=f)
    if k == "R2+":
        return MoveSite("R2-", fresh_name(m, site.register), agent=site.agent)
    if k == "R2-":
        u, a, b, keep, d = _r2_minus_pattern(m, site.register)
        return MoveSite("R2+", keep, agent=u, side="after" if keep == a else "before", sign=d)
    if k == "R3":
        per = _r3_options(m, site.register, site.agent, site.partner)
        wanted = dict(site.choices)
        choices = []
        for opts in per:
            pick = [o for o in opts if o[1] == wanted[o[0]]][0]
            choices.append((pick[4], pick[1]))
        return MoveSite("R3", site.partner, agent=site.agent, partner=site.register,
                        choices=tuple(sorted(choices)))
    if k == "Stab+":
        if site.variant == "agent":
            return MoveSite("Stab-", site.register, variant="agent")
        n = fresh_name(m, site.register)
        tail = site.register if site.side == "after" else n
        return MoveSite("Stab-", tail, variant="edge")
    if k == "Stab-":
        r = site.register
        if site.variant == "agent":
            return MoveSite("Stab+", r, op=m.agents[r].op, variant="agent")
        h = m.next(r)
        if h in m.agents:
            return MoveSite("Stab+", h, side="before", variant="edge")
        return MoveSite("Stab+", r, side="after", variant="edge")
    raise ValueError(f"unknown move kind {k!r}")


def replay(m: Machine, sites: Iterable[MoveSite]) -> Machine:
    for s in sites:
        m = apply_move(m, s)
    return m


def site_from_json(d: dict) -> MoveSite:
    from .io import op_from_json

    kind = d.get("kind")
    if kind not in KINDS:
        raise ValueError(f"unknown move kind {kind!r}")
    return MoveSite(
        kind,
        d["register"],
        agent=d.get("agent"),
        side=d.get("side"),
        op=op_from_json(d["op"]) if "op" in d else None,
        sign=d.get("sign"),
        partner=d.get("partner"),
        choices=tuple(tuple(c) for c in d.get("choices", ())),
        variant=d.get("variant"),
    )
