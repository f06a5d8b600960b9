import random
from fractions import Fraction as F

from tanglekit import (
    Budget,
    DistinguishedByInvariant,
    Found,
    NotFoundWithinBudget,
    apply_move,
    canonical_key,
    enumerate_moves,
    replay,
    search_equivalent,
)
from tanglekit.builders import random_machine, single_interaction, toy_machines
from tanglekit.canonical import invariant_profile


def test_toy_single_r3():
    left, right = toy_machines(F(4), F(8), F(0), F(1, 4), F(1, 2))
    res = search_equivalent(left, right, Budget(max_moves=4))
    assert isinstance(res, Found)
    assert [s.kind for s in res.sequence] == ["R3"]
    assert canonical_key(replay(left, res.sequence)) == canonical_key(right)


def test_relabelled_is_found_empty():
    m = single_interaction(F(0), F(2))
    res = search_equivalent(m, m.relabel({"x": "a", "y": "b", "out": "c"}))
    assert isinstance(res, Found) and res.sequence == []


def test_different_terminal_colours_distinguished():
    a = single_interaction(F(0), F(2))
    b = single_interaction(F(0), F(4))
    res = search_equivalent(a, b)
    assert isinstance(res, DistinguishedByInvariant)
    assert res.profile_a == invariant_profile(a)
    assert res.to_json()["status"] == "distinguished"


def test_budget_exhaustion_is_inconclusive():
    left, right = toy_machines(F(4), F(8), F(0), F(1, 4), F(1, 2))
    res = search_equivalent(left, right, Budget(max_moves=0))
    assert isinstance(res, NotFoundWithinBudget)
    assert res.to_json()["status"] == "inconclusive"


def test_random_walks_are_recovered():
    rng = random.Random(4)
    found = 0
    for _ in range(8):
        m = random_machine(rng, 6, max_agents=2)
        cur = m
        for _ in range(rng.randint(1, 3)):
            sites = enumerate_moves(cur, ["R2+", "R2-", "R3", "R1-", "Stab-"])
            if not sites:
                break
            cur = apply_move(cur, rng.choice(sites))
        res = search_equivalent(m, cur, Budget(max_moves=6, max_states=20000))
        assert not isinstance(res, DistinguishedByInvariant)
        if isinstance(res, Found):
            found += 1
            assert canonical_key(replay(m, res.sequence)) == canonical_key(cur)
    assert found == 8


def test_affine_automorphism():
    a = single_interaction(F(0), F(2))
    b = single_interaction(F(1), F(5))
    f = a.quandle.automorphism(F(2), F(1))
    res = search_equivalent(a, b, automorphism=f)
    assert isinstance(res, Found) and res.automorphism == f

