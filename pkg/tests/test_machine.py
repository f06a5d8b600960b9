import random
from fractions import Fraction as F

import pytest

from tanglekit import (
    Agent,
    Component,
    Inconsistent,
    LinearQuandle,
    Machine,
    MachineError,
    Underdetermined,
    closure,
    concatenate,
    endpoints,
    linear,
    processes,
    solve_coloring,
    solve_linear,
    validate,
)
from tanglekit.builders import random_machine, single_interaction
from tanglekit.info import DEMO_SPEC, build_capacity_triple
from tanglekit.markov import markov_machine


def test_single_interaction_valid():
    m = single_interaction(F(0), F(2))
    assert m.colors["out"] == 1
    assert validate(m).ok


def test_perturbed_output_reports_one_violation():
    m = single_interaction(F(0), F(2))
    bad = m.with_colors({"out": F(2)})
    rep = validate(bad)
    assert not rep.ok
    assert len(rep.violations) == 1
    v = rep.violations[0]
    assert (v.tail, v.head, v.agent) == ("x", "out", "y")
    assert v.expected == 1 and v.actual == 2
    assert "expected 1, found 2" in v.describe()


def test_capacity_machine_valid():
    (_, _, right), _ = build_capacity_triple(DEMO_SPEC)
    assert len(processes(right)) == 3
    assert validate(right).ok


def test_solve_forward_and_backward():
    m = single_interaction(F(0), F(2), colored=False)
    assert solve_coloring(m, {"x": F(0), "y": F(2)})["out"] == 1
    assert solve_coloring(m, {"out": F(1), "y": F(2)})["x"] == 0


def test_underdetermined_lists_registers():
    m = single_interaction(F(0), F(2), colored=False)
    with pytest.raises(Underdetermined) as exc:
        solve_coloring(m, {"x": F(0)})
    assert exc.value.unresolved == ["out", "y"]


def test_inconsistent_cycle():
    q = LinearQuandle()
    m = Machine(q, [Component("cycle", ["a", "b"]), Component("path", ["y"])],
                {"y": Agent(linear("1/2"), [("a", 1)])})
    # a -> b shifts toward y, b -> a is plain, so only a = y is consistent
    with pytest.raises(Inconsistent) as exc:
        solve_coloring(m, {"a": F(0), "y": F(2)})
    assert exc.value.register in ("a", "b")
    assert solve_coloring(m, {"a": F(2), "y": F(2)})["b"] == 2


def test_solution_independent_of_worklist_order():
    rng = random.Random(7)
    for _ in range(30):
        m = random_machine(rng, 10)
        seeds = {r: m.colors[r] for r in m.registers if rng.random() < 0.6}
        try:
            ref = solve_coloring(m, seeds)
        except Underdetermined:
            continue
        for _ in range(5):
            order = m.registers[:]
            rng.shuffle(order)
            assert solve_coloring(m, seeds, order=order) == ref
        assert validate(m.replace(colors=ref)).ok


def test_random_machines_are_valid():
    rng = random.Random(11)
    for _ in range(50):
        assert validate(random_machine(rng)).ok


def test_processes_and_endpoints():
    m = single_interaction(F(0), F(2))
    ps = processes(m)
    assert [p.kind for p in ps] == ["path", "path"]
    assert endpoints(m) == (["x", "y"], ["out", "y"])
    mk = markov_machine(F(3, 10), F(1, 2))
    assert [p.kind for p in processes(mk)] == ["path", "path"]
    closed = closure(mk, [("v1_out", "v1_in"), ("v2_out", "v2_in")])
    assert [p.kind for p in processes(closed)] == ["cycle", "cycle"]
    assert all(p.is_control for p in processes(closed))


def test_concatenate_two_interactions():
    a = single_interaction(F(0), F(2))
    b = single_interaction(F(1), F(4)).relabel({"x": "x2", "out": "out2", "y": "y2"})
    m = concatenate(a, b, [("out", "x2")])
    chain = [c for c in m.components if len(c.registers) == 3]
    assert [c.registers for c in chain] == [("x", "out", "out2")]
    assert validate(m).ok
    assert m.colors["out2"] == F(5, 2)
    # untouched registers keep their colours
    assert (m.colors["x"], m.colors["y"], m.colors["y2"]) == (0, 2, 4)


def test_concatenate_colour_mismatch():
    a = single_interaction(F(0), F(2))
    b = single_interaction(F(5), F(4)).relabel({"x": "x2", "out": "out2", "y": "y2"})
    with pytest.raises(MachineError):
        concatenate(a, b, [("out", "x2")])


def test_concatenate_needs_endpoints():
    a = single_interaction(F(0), F(2))
    b = single_interaction(F(1), F(4)).relabel({"x": "x2", "out": "out2", "y": "y2"})
    with pytest.raises(MachineError):
        concatenate(a, b, [("x", "x2")])


def test_closure_with_fixed_colour():
    q = LinearQuandle()
    unit = Machine(q, [Component("path", ["x", "x_next"]), Component("path", ["u"])],
                   {"u": Agent(linear("1/3"), [("x", 1)])}, {"x": F(5), "u": F(5), "x_next": F(5)})
    closed = closure(unit, [("x_next", "x")])
    assert sorted(c.kind for c in closed.components) == ["cycle", "path"]
    assert validate(closed).ok


def test_markov_closure_line():
    closed = closure(markov_machine(F(3, 10), F(1, 2)), [("v1_out", "v1_in"), ("v2_out", "v2_in")])
    sol = solve_linear(closed)
    assert sol.kind == "line"
    half = closed.with_colors({r: F(1, 2) for r in closed.registers})
    assert validate(half).ok


def test_agent_on_terminal_rejected():
    q = LinearQuandle()
    with pytest.raises(MachineError):
        Machine(q, [Component("path", ["x", "out"]), Component("path", ["y"])],
                {"y": Agent(linear("1/2"), [("out", 1)])})


def test_doubly_owned_edge_rejected():
    q = LinearQuandle()
    with pytest.raises(MachineError):
        Machine(q, [Component("path", ["x", "out"]), Component("path", ["y"]), Component("path", ["z"])],
                {"y": Agent(linear("1/2"), [("x", 1)]), "z": Agent(linear("1/2"), [("x", 1)])})
