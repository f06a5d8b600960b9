"""Relabeling-invariant keys and endpoint invariants for machines."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .colors import EPS_EQ, color_key
from .machine import Machine


def _op_key(op) -> str:
    """Forward label as a string; inverse labels are folded into patient flags."""
    return json.dumps(op.forward().key())


def _flag(op, f: int) -> int:
    return -f if op.inverse else f


def _refine(m: Machine, ckeys: dict) -> dict:
    """Colour refinement over the register graph; returns invariant integer ranks."""
    regs = m.registers
    kind = {r: m.component_of(r).kind for r in regs}
    label = {}
    for r in regs:
        ag = m.agents.get(r)
        label[r] = (kind[r], ckeys[r], _op_key(ag.op) if ag else "")
    ranks = _compress(label)
    n_classes = len(set(ranks.values()))
    while True:
        new = {}
        for r in regs:
            p, nx = m.prev(r), m.next(r)
            out_edge = m.owner(r)
            in_edge = m.owner(p) if p is not None else None
            ag = m.agents.get(r)
            acts = ()
            if ag:
                acts = tuple(sorted((ranks[t], ranks[m.next(t)], _flag(ag.op, f)) for t, f in ag.patients))
            new[r] = (
                ranks[r],
                ranks[p] if p is not None else -1,
                ranks[nx] if nx is not None else -1,
                (ranks[out_edge[0]], _flag(m.agents[out_edge[0]].op, out_edge[1])) if out_edge else (),
                (ranks[in_edge[0]], _flag(m.agents[in_edge[0]].op, in_edge[1])) if in_edge else (),
                acts,
            )
        ranks = _compress(new)
        k = len(set(ranks.values()))
        if k == n_classes:
            return ranks
        n_classes = k


def _compress(labels: dict) -> dict:
    order = {lab: i for i, lab in enumerate(sorted(set(labels.values())))}
    return {r: order[lab] for r, lab in labels.items()}


def _rotations(seq: tuple) -> list[int]:
    n = len(seq)
    rots = [seq[i:] + seq[:i] for i in range(n)]
    best = min(rots)
    return [i for i, rot in enumerate(rots) if rot == best]


def _isolated(m: Machine, regs) -> bool:
    return all(r not in m.agents and m.owner(r) is None for r in regs)


def canonical_key(m: Machine, tol: float = EPS_EQ) -> bytes:
    """Bytes equal for machines differing only by register names or patient order.

    Floats are quantized at ``tol``.  Symbolic colours raise ``TypeError``.
    """
    ckeys = {r: color_key(m.colors[r], tol) for r in m.registers}
    ranks = _refine(m, ckeys)
    # per component: (sort key, list of admissible register orders)
    comps = []
    for c in m.components:
        seq = tuple(ranks[r] for r in c.registers)
        if c.kind == "path":
            comps.append(((0, seq), [list(c.registers)], c))
        else:
            rs = _rotations(seq)
            orders = [list(c.registers[i:] + c.registers[:i]) for i in rs]
            comps.append(((1, seq[rs[0]:] + seq[:rs[0]]), orders, c))
    comps.sort(key=lambda x: x[0])
    groups = [list(g) for _, g in itertools.groupby(comps, key=lambda x: x[0])]

    group_choices = []
    for g in groups:
        if len(g) > 1 and all(_isolated(m, item[2].registers) for item in g):
            # interchangeable with no cross references: one ordering suffices
            group_choices.append([[item[1][0] for item in g]])
            continue
        options = []
        for perm in itertools.permutations(g):
            for rots in itertools.product(*(item[1] for item in perm)):
                options.append(list(rots))
        group_choices.append(options)

    shape = [(item[2].kind, len(item[2].registers)) for g in groups for item in g]
    best = None
    for choice in itertools.product(*group_choices):
        order = [r for grp in choice for comp in grp for r in comp]
        idx = {r: i for i, r in enumerate(order)}
        agents = []
        for u, ag in m.agents.items():
            pts = sorted((idx[t], _flag(ag.op, f)) for t, f in ag.patients)
            agents.append((idx[u], _op_key(ag.op), pts))
        agents.sort()
        enc = (shape, [ckeys[r] for r in order], agents)
        if best is None or enc < best:
            best = enc
    return json.dumps(best, separators=(",", ":")).encode()


@dataclass(frozen=True)
class InvariantProfile:
    """Endpoint colours of every path plus the numbers of paths and cycles."""

    endpoints: tuple
    n_paths: int
    n_cycles: int

    def to_json(self) -> dict:
        return {
            "endpoints": [[list(a), list(b)] for a, b in self.endpoints],
            "paths": self.n_paths,
            "cycles": self.n_cycles,
        }


def invariant_profile(m: Machine, tol: float = EPS_EQ) -> InvariantProfile:
    ends = []
    n_cycles = 0
    for c in m.components:
        if c.kind == "cycle":
            n_cycles += 1
            continue
        ends.append((color_key(m.colors[c.registers[0]], tol), color_key(m.colors[c.registers[-1]], tol)))
    return InvariantProfile(tuple(sorted(ends)), len(ends), n_cycles)
