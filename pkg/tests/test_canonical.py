import random
from fractions import Fraction as F

from tanglekit import Agent, Component, LinearQuandle, Machine, OpLabel, canonical_key, invariant_profile
from tanglekit.builders import random_machine, single_interaction, toy_machines


def shuffled(m: Machine, rng: random.Random) -> Machine:
    """Same machine under fresh names, reordered components and patient lists."""
    names = m.registers[:]
    rng.shuffle(names)
    mapping = {r: f"n{i}" for i, r in enumerate(names)}
    r = m.relabel(mapping)
    comps = list(r.components)
    rng.shuffle(comps)
    agents = {}
    for u, a in r.agents.items():
        pts = list(a.patients)
        rng.shuffle(pts)
        agents[u] = Agent(a.op, pts)
    return Machine(r.quandle, comps, agents, r.colors)


def test_relabel_invariance():
    rng = random.Random(2)
    for _ in range(60):
        m = random_machine(rng)
        assert canonical_key(shuffled(m, rng)) == canonical_key(m)


def test_colour_change_changes_key():
    m = single_interaction(F(0), F(2))
    other = single_interaction(F(0), F(4))
    assert canonical_key(m) != canonical_key(other)


def test_toy_keys_differ_profiles_agree():
    left, right = toy_machines(F(4), F(8), F(0), F(1, 4), F(1, 2))
    assert canonical_key(left) != canonical_key(right)
    assert invariant_profile(left) == invariant_profile(right)


def test_single_profile():
    p = invariant_profile(single_interaction(F(0), F(2)))
    ends = sorted((a[1], b[1]) for a, b in p.endpoints)
    assert ends == sorted([("0", "1"), ("2", "2")])
    assert (p.n_paths, p.n_cycles) == (2, 0)


def test_float_key_quantized():
    q = LinearQuandle("float")

    def mk(x):
        return Machine(q, [Component("path", ["x", "out"]), Component("path", ["y"])],
                       {"y": Agent(OpLabel("linear", 0.5), [("x", 1)])},
                       {"x": x, "y": 2.0, "out": (x + 2.0) / 2})

    assert canonical_key(mk(0.1 + 0.2)) == canonical_key(mk(0.3))
