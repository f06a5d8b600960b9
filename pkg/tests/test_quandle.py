import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanglekit import (
    ConjugationQuandle,
    LinearQuandle,
    LoglinearQuandle,
    OpLabel,
    Perm,
    PowerProduct,
    QuandleError,
    TableQuandle,
    check_axioms,
    dihedral,
    linear,
)
from tanglekit.colors import Mat

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
params = fractions.filter(lambda s: s != 1)


def test_linear_apply_and_invert():
    q = LinearQuandle()
    assert q.apply(linear("1/2"), F(0), F(2)) == 1
    assert q.invert(linear("1/2"), F(1), F(2)) == 0
    # the inverse label computes the same thing as invert
    assert q.apply(linear("1/2", inverse=True), F(1), F(2)) == 0


def test_linear_rejects_s_equal_one():
    with pytest.raises(QuandleError):
        LinearQuandle(params=[1])
    with pytest.raises(QuandleError):
        LinearQuandle().check_op(linear(1))


def test_degenerate_linear_fails_reversibility():
    q = LinearQuandle(params=[1], allow_degenerate=True)
    rep = check_axioms(q, [OpLabel("linear", F(1))], samples=50)
    assert not rep.reversibility.passed
    assert rep.reversibility.witness is not None


@given(params, fractions, fractions, fractions)
def test_linear_axioms_pointwise(s, x, y, z):
    q = LinearQuandle()
    op = linear(s)
    assert q.apply(op, x, x) == x
    assert q.invert(op, q.apply(op, x, y), y) == x
    assert q.apply(op, q.invert(op, x, y), y) == x
    t = linear(F(1, 3))
    lhs = q.apply(t, q.apply(op, x, y), z)
    rhs = q.apply(op, q.apply(t, x, z), q.apply(t, y, z))
    assert lhs == rhs


@pytest.mark.parametrize("s", [F(1, 4), F(1, 2), F(3, 4)])
def test_linear_axiom_report(s):
    rep = check_axioms(LinearQuandle(params=[s, F(1, 4)]), samples=200, seed=3)
    assert rep.ok and rep.violations() == 0


def test_float_linear_matches_rational():
    qf, qr = LinearQuandle("float"), LinearQuandle()
    rng = random.Random(1)
    for _ in range(100):
        x, y = F(rng.randint(-50, 50), 7), F(rng.randint(-50, 50), 3)
        exact = qr.apply(linear(F(2, 7)), x, y)
        approx = qf.apply(OpLabel("linear", 2 / 7), float(x), float(y))
        assert abs(approx - float(exact)) < 1e-9


def test_matrix_linear_keeps_hermitian():
    q = LinearQuandle(shape=(2, 2))
    a = Mat([[F(1), F(2)], [F(2), F(0)]])
    b = Mat([[F(0), F(1)], [F(1), F(5)]])
    c = q.apply(linear("1/3"), a, b)
    assert c.is_hermitian(0)
    assert c == Mat([[F(2, 3), F(5, 3)], [F(5, 3), F(5, 3)]])


def test_conjugation_identity_and_inverse():
    q = ConjugationQuandle("perm", 3)
    op = OpLabel("conjugation")
    e = q.identity()
    for x in q.elements():
        assert q.apply(op, x, e) == x
        for y in q.elements():
            z = y.inverse() * x * y
            assert q.apply(op, x, y) == z
            assert q.invert(op, z, y) == x


def test_conjugation_s3_exhaustive():
    rep = check_axioms(ConjugationQuandle("perm", 3))
    assert rep.ok
    # forward and inverse labels give four operation pairs per triple
    assert rep.distributivity.checked == 4 * 6 ** 3


def test_matrix_conjugation_sampled():
    assert check_axioms(ConjugationQuandle("matrix", 2), samples=100).ok


def test_loglinear_exact():
    q = LoglinearQuandle(params=[F(1, 2)])
    x, y = PowerProduct.from_int(4), PowerProduct.from_int(9)
    assert q.apply(OpLabel("loglinear", F(1, 2)), x, y) == PowerProduct.from_int(6)
    assert check_axioms(q, samples=300).ok


def test_loglinear_float_rejects_nonpositive():
    q = LoglinearQuandle(exact=False, params=[0.5])
    with pytest.raises(QuandleError):
        q.apply(OpLabel("loglinear", 0.5), -1.0, 2.0)


def test_dihedral_table():
    q = dihedral(5)
    op = OpLabel("table", "R")
    assert q.apply(op, 1, 3) == 0
    assert q.invert(op, 0, 3) == 1
    assert check_axioms(q).ok


def test_bad_table_is_reported_not_raised():
    # x |> y = y is not idempotent-compatible with reversibility
    q = TableQuandle({"K": [[y for y in range(3)] for _ in range(3)]})
    rep = check_axioms(q)
    assert not rep.ok
    assert not rep.reversibility.passed


def test_table_shape_checked():
    with pytest.raises(QuandleError):
        TableQuandle({"R": [[0, 1], [1]]})


@settings(max_examples=50)
@given(st.permutations(range(4)), st.permutations(range(4)))
def test_conjugation_s4_reversible(a, b):
    q = ConjugationQuandle("perm", 4)
    op = OpLabel("conjugation")
    x, y = Perm(a), Perm(b)
    assert q.invert(op, q.apply(op, x, y), y) == x


def test_affine_automorphism_commutes_with_operation():
    q = LinearQuandle()
    f = q.automorphism(F(3), F(-1))
    op = linear(F(2, 5))
    for x, y in [(F(0), F(1)), (F(7, 2), F(-3))]:
        assert f(q.apply(op, x, y)) == q.apply(op, f(x), f(y))
    assert f.inverse()(f(F(5))) == 5
