import random
from fractions import Fraction as F

import pytest

from tanglekit import Component, Found, LinearQuandle, Machine, invariant_profile, search_equivalent, validate
from tanglekit.info import (
    DEMO_SPEC,
    EntropySpec,
    InteractionClass,
    SpecError,
    build_capacity_triple,
    classify_interactions,
    fuse_entropy,
    global_capacity,
    interaction_capacities,
    interaction_capacity,
    mutual_information,
)


def random_spec(rng: random.Random) -> EntropySpec:
    while True:
        h1 = F(rng.randint(20, 100), 100)
        h2 = F(rng.randint(0, 98), 100) * h1
        h1g2 = h2 + (h1 - h2) * F(rng.randint(1, 99), 100)
        h0 = F(rng.randint(0, 100), 100)
        t = (h1 - h1g2) / (h1 - h2)
        h0t2 = (1 - t) * h0 + t * h2
        if h0t2 >= h1g2:
            continue
        h1g02 = h0t2 + (h1g2 - h0t2) * F(rng.randint(1, 100), 100)
        return EntropySpec(h0, h1, h2, h1g2, h1g02)


def test_fuse_entropy():
    assert fuse_entropy(F(1), F(3, 10), F(4, 7)) == F(3, 5)
    assert fuse_entropy(F(2, 3), F(2, 3), F(1, 5)) == F(2, 3)
    assert fuse_entropy(1, 0, 0.5) == 0.5
    assert fuse_entropy(F(1), F(1, 2), F(1, 4)) < 1


def test_capacity_and_information():
    assert interaction_capacity(F(1), F(3, 5)) == F(2, 5)
    assert interaction_capacity(F(3, 5), F(9, 20)) == F(3, 20)
    assert interaction_capacity(F(1, 3), F(1, 3)) == 0
    assert mutual_information(F(1), F(3, 5)) == F(2, 5)
    assert mutual_information(F(3, 5), F(9, 20)) == F(3, 20)
    assert mutual_information(F(1, 2), F(1, 2)) == 0
    with pytest.raises(SpecError):
        mutual_information(F(1, 2), F(3, 4))


def test_demo_parameters():
    assert DEMO_SPEC.t == F(4, 7)
    assert DEMO_SPEC.s == F(7, 10)
    assert DEMO_SPEC.h0t2 == F(27, 70)


def test_spec_inequalities():
    with pytest.raises(SpecError):
        EntropySpec(F(1, 2), F(1), F(3, 5), F(1, 2), F(2, 5)).check()
    with pytest.raises(SpecError):
        EntropySpec(F(1, 2), F(1), F(3, 10), F(3, 5), F(1, 5)).check()


def test_triple_shared_invariants():
    (left, middle, right), sites = build_capacity_triple(DEMO_SPEC)
    for m in (left, middle, right):
        assert validate(m).ok
        assert global_capacity(m) == [0, F(4, 35), F(11, 20)]
    assert invariant_profile(left) == invariant_profile(middle) == invariant_profile(right)
    assert [s.kind for s in sites] == ["R3", "R2+"]


def test_triple_search_equivalence():
    (left, middle, right), _ = build_capacity_triple(DEMO_SPEC)
    assert isinstance(search_equivalent(right, middle), Found)
    assert isinstance(search_equivalent(middle, left), Found)


def test_right_machine_capacities():
    (_, _, right), _ = build_capacity_triple(DEMO_SPEC)
    caps = {(t, h): c for u in right.agents for t, h, c in interaction_capacities(right, u)}
    assert caps[("h1", "h1g2")] == F(2, 5)
    assert caps[("h1g2", "h1g02")] == F(3, 20)
    assert F(11, 20) in global_capacity(right)


def test_classification():
    (left, middle, right), _ = build_capacity_triple(DEMO_SPEC)
    cond = DEMO_SPEC.conditionals()
    assert all(r.cls is InteractionClass.OPTIMAL for r in classify_interactions(right, cond).values())
    # the inverse rewrite leaves [0, 1]: (1 - 0.7 * 0.5) / 0.3 = 13/6
    assert left.colors["g"] == F(13, 6)
    assert classify_interactions(left, cond)["h0"].cls is InteractionClass.ABSTRACT
    # H(1) fused with H(0) is 13/20; a different H(1|0) makes it suboptimal
    spec = EntropySpec(DEMO_SPEC.H0, DEMO_SPEC.H1, DEMO_SPEC.H2, DEMO_SPEC.H1g2, DEMO_SPEC.H1g02, F(7, 10))
    (_, middle, _), _ = build_capacity_triple(spec)
    assert classify_interactions(middle, spec.conditionals())["h0"].cls is InteractionClass.SUBOPTIMAL


def test_no_interactions_zero_capacity():
    m = Machine(LinearQuandle(), [Component("path", ["a", "b"]), Component("path", ["c"])],
                colors={"a": F(1, 2), "b": F(1, 2), "c": F(1)})
    assert global_capacity(m) == [0, 0]
    assert classify_interactions(m) == {}


def test_random_specs_optimal():
    rng = random.Random(0)
    for _ in range(40):
        spec = random_spec(rng)
        (left, middle, right), _ = build_capacity_triple(spec)
        caps = {(t, h): c for u in right.agents for t, h, c in interaction_capacities(right, u)}
        assert caps[("h1", "h1g2")] == mutual_information(spec.H1, spec.H1g2)
        assert caps[("h1g2", "h1g02")] == mutual_information(spec.H1g2, spec.H1g02)
        assert global_capacity(left) == global_capacity(middle) == global_capacity(right)
        assert 0 < spec.t < 1 and 0 < spec.s < 1
