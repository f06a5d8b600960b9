"""Budgeted search for a move sequence relating two machines."""
from __future__ import annotations

from dataclasses import dataclass, field

from .canonical import InvariantProfile, canonical_key, invariant_profile
from .machine import Machine
from .moves import KINDS, NON_INCREASING, MoveSite, apply_move, enumerate_moves
from .quandle import AffineMap


@dataclass
class Budget:
    max_moves: int = 8
    max_states: int = 20000
    max_stabilizations: int = 2


@dataclass
class Found:
    sequence: list
    states: int
    automorphism: AffineMap | None = None

    status = "found"

    def to_json(self) -> dict:
        out = {"status": self.status, "length": len(self.sequence),
               "sequence": [s.to_json() for s in self.sequence], "states": self.states}
        if self.automorphism is not None:
            out["automorphism"] = {"a": str(self.automorphism.a), "b": str(self.automorphism.b)}
        return out


@dataclass
class NotFoundWithinBudget:
    states: int
    reason: str

    status = "inconclusive"

    def to_json(self) -> dict:
        return {"status": self.status, "states": self.states, "reason": self.reason}


@dataclass
class DistinguishedByInvariant:
    profile_a: InvariantProfile
    profile_b: InvariantProfile

    status = "distinguished"

    def to_json(self) -> dict:
        return {"status": self.status, "profile_a": self.profile_a.to_json(),
                "profile_b": self.profile_b.to_json()}


_STAB_DELTA = {"Stab+": 1, "Stab-": -1}
_INVERSE_KIND = {"R1+": "R1-", "R1-": "R1+", "R2+": "R2-", "R2-": "R2+", "R3": "R3",
                 "Stab+": "Stab-", "Stab-": "Stab+"}


@dataclass
class _Side:
    root: Machine
    dist: dict = field(default_factory=dict)
    parent: dict = field(default_factory=dict)  # key -> (parent key, site)
    machine: dict = field(default_factory=dict)
    stab: dict = field(default_factory=dict)
    frontier: list = field(default_factory=list)

    def __post_init__(self):
        k = canonical_key(self.root)
        self.dist[k] = 0
        self.machine[k] = self.root
        self.stab[k] = 0
        self.frontier = [k]


def search_equivalent(a: Machine, b: Machine, budget: Budget | None = None,
                      automorphism: AffineMap | None = None):
    """Look for moves turning ``a`` into ``b``.

    Differing invariant profiles give a :class:`DistinguishedByInvariant`
    certificate.  Otherwise a bidirectional breadth-first search runs twice:
    first with only non-increasing moves (cheap, usually enough), then with
    all moves.  Exhausting the budget is reported as inconclusive.
    """
    budget = budget or Budget()
    if automorphism is not None:
        a = a.map_colors(automorphism)
    pa, pb = invariant_profile(a), invariant_profile(b)
    if pa != pb:
        return DistinguishedByInvariant(pa, pb)
    ops = {o.key(): o for o in a.ops() + b.ops()}
    ops = list(ops.values()) or None
    states = 0
    for kinds in (NON_INCREASING, KINDS):
        res, n = _bidirectional(a, b, kinds, ops, budget, budget.max_states - states)
        states += n
        if res is not None:
            seq = _reconstruct(a, b, res, ops)
            return Found(seq, states, automorphism)
        if states >= budget.max_states:
            break
    return NotFoundWithinBudget(states, f"no sequence of at most {budget.max_moves} moves within {states} states")


def _bidirectional(a, b, kinds, ops, budget, max_states):
    A, B = _Side(a), _Side(b)
    states = 2
    meet = _meet(A, B)
    if meet is not None:
        return (A, B, meet), states
    while A.frontier or B.frontier:
        depth_a = max(A.dist[k] for k in A.frontier) if A.frontier else 0
        depth_b = max(B.dist[k] for k in B.frontier) if B.frontier else 0
        if depth_a + depth_b >= budget.max_moves:
            return None, states
        side, other = (A, B) if (len(A.frontier) <= len(B.frontier) and A.frontier) or not B.frontier else (B, A)
        nxt = []
        for k in side.frontier:
            m = side.machine[k]
            for site in enumerate_moves(m, kinds, ops):
                s = side.stab[k] + _STAB_DELTA.get(site.kind, 0)
                if abs(s) > budget.max_stabilizations:
                    continue
                child = apply_move(m, site)
                ck = canonical_key(child)
                if ck in side.dist:
                    continue
                side.dist[ck] = side.dist[k] + 1
                side.parent[ck] = (k, site)
                side.machine[ck] = child
                side.stab[ck] = s
                states += 1
                if ck in other.dist and side.dist[ck] + other.dist[ck] <= budget.max_moves:
                    return (A, B, ck), states
                nxt.append(ck)
                if states >= max_states:
                    return None, states
        side.frontier = nxt
    return None, states


def _meet(A, B):
    for k in A.dist:
        if k in B.dist:
            return k
    return None


def _reconstruct(a: Machine, b: Machine, found, ops) -> list:
    A, B, meet = found
    forward = []
    k = meet
    while k in A.parent:
        pk, site = A.parent[k]
        forward.append(site)
        k = pk
    forward.reverse()
    cur = a
    for site in forward:
        cur = apply_move(cur, site)
    # walk back along b's tree, re-deriving each step on the current machine
    k = meet
    seq = list(forward)
    while k in B.parent:
        pk, site = B.parent[k]
        want = _INVERSE_KIND[site.kind]
        cands = enumerate_moves(cur, KINDS, ops)
        cands.sort(key=lambda s: s.kind != want)
        for cand in cands:
            nxt = apply_move(cur, cand)
            if canonical_key(nxt) == pk:
                seq.append(cand)
                cur = nxt
                break
        else:  # pragma: no cover - would mean moves are not invertible
            raise RuntimeError(f"cannot invert {site.kind} step while rebuilding the path")
        k = pk
    return seq
