import itertools

import pytest
from hypothesis import given, settings, strategies as st

from degradelab.bdd import FALSE, TRUE, BddManager, ReliabilityPolynomial
from degradelab.errors import MissingVariable, OutOfRange

from helpers import distinct_subfunctions, truth_probability


def shared_active_formula(y):
    # (y1 | y0) & (y1 | y2)
    return (y[1] or y[0]) and (y[1] or y[2])


def build_shared_active(m):
    x0, x1, x2 = (m.var(i) for i in range(3))
    return m.and_(m.or_(x1, x0), m.or_(x1, x2))


def test_restrict_to_terminal():
    m = BddManager()
    f = m.or_(m.var(0), m.var(1))
    assert m.restrict(m.restrict(f, 0, 0), 1, 0) == FALSE
    assert m.restrict(f, 0, 1) == TRUE
    assert m.restrict(f, 0, 0) == m.var(1)


def test_contradiction():
    m = BddManager()
    x = m.var(4)
    assert m.and_(x, m.not_(x)) == FALSE


def test_example_node_count_matches_subfunction_oracle():
    m = BddManager()
    f = build_shared_active(m)
    expected = distinct_subfunctions(lambda y: int(bool(shared_active_formula(y))), 3)
    assert m.size(f) == expected == 4


def test_example_eval():
    m = BddManager()
    f = build_shared_active(m)
    assert m.eval(f, [1, 1, 1]) == 1
    assert m.eval(f, [0, 0, 1]) == 0
    assert m.eval(m.var(2), {2: 0}) == 0
    with pytest.raises(MissingVariable):
        m.eval(f, {0: 1})


def test_probabilities():
    m = BddManager()
    assert m.probability(m.var(0), 0.9) == pytest.approx(0.9)
    assert m.probability(m.or_(m.var(0), m.var(1)), 0.9) == pytest.approx(0.99)
    brute = truth_probability(shared_active_formula, 3, [0.9] * 3)
    assert brute == pytest.approx(0.981)
    assert m.probability(build_shared_active(m), 0.9) == pytest.approx(brute, abs=1e-12)


def test_probability_errors():
    m = BddManager()
    f = m.var(1)
    with pytest.raises(OutOfRange):
        m.probability(f, 1.5)
    with pytest.raises(MissingVariable):
        m.probability(f, [0.5])
    with pytest.raises(OutOfRange):
        m.probability(f, {1: -0.1})


def test_polynomials():
    m = BddManager()
    assert m.reliability_polynomial(m.var(0)).coefficients == (0, 1)
    assert m.reliability_polynomial(m.or_(m.var(0), m.var(1))).coefficients == (0, 2, -1)
    assert m.reliability_polynomial(m.conjoin(m.var(i) for i in range(4))).coefficients == \
        (0, 0, 0, 0, 1)
    assert m.reliability_polynomial(TRUE).coefficients == (1,)
    assert m.reliability_polynomial(FALSE).coefficients == (0,)


def test_polynomial_mttf_closed_forms():
    assert ReliabilityPolynomial([0, 1]).mttf(0.01) == pytest.approx(100.0, abs=1e-9)
    assert ReliabilityPolynomial([0, 2, -1]).mttf(0.01) == pytest.approx(150.0, abs=1e-9)
    assert ReliabilityPolynomial([0, 0, 0, 0, 1]).mttf(0.01) == pytest.approx(25.0, abs=1e-9)


def test_hash_consing_canonical():
    m = BddManager()
    a = m.or_(m.var(0), m.and_(m.var(1), m.var(2)))
    b = m.not_(m.and_(m.not_(m.var(0)), m.not_(m.and_(m.var(2), m.var(1)))))
    assert a == b


def test_to_text():
    m = BddManager()
    f = m.and_(m.var(0), m.var(1))
    lines = m.to_text(f).splitlines()
    assert lines[0] == f"root {f}"
    assert len(lines) == 1 + m.size(f)


# random monotone formulas: nested and/or over a few variables
def formulas(n):
    leaf = st.integers(0, n - 1).map(lambda i: ("var", i))
    return st.recursive(leaf, lambda kids: st.tuples(st.sampled_from(["and", "or"]), kids, kids),
                        max_leaves=10)


def build(m, f):
    if f[0] == "var":
        return m.var(f[1])
    a, b = build(m, f[1]), build(m, f[2])
    return m.and_(a, b) if f[0] == "and" else m.or_(a, b)


def evaluate(f, y):
    if f[0] == "var":
        return y[f[1]]
    a, b = evaluate(f[1], y), evaluate(f[2], y)
    return (a and b) if f[0] == "and" else (a or b)


@settings(max_examples=120, deadline=None)
@given(formulas(5), st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_shannon_matches_enumeration(f, r):
    m = BddManager()
    u = build(m, f)
    assert m.probability(u, r) == pytest.approx(truth_probability(lambda y: evaluate(f, y), 5, r),
                                                abs=1e-9)
    for y in itertools.product((0, 1), repeat=5):
        assert m.eval(u, y) == int(bool(evaluate(f, y)))


@settings(max_examples=80, deadline=None)
@given(formulas(5))
def test_restrict_all_equals_eval(f):
    m = BddManager()
    u = build(m, f)
    for y in itertools.product((0, 1), repeat=5):
        v = u
        for i, bit in enumerate(y):
            v = m.restrict(v, i, bit)
        assert v == m.eval(u, y)


@settings(max_examples=80, deadline=None)
@given(formulas(6), st.floats(0, 1))
def test_polynomial_matches_probability(f, r):
    m = BddManager()
    u = build(m, f)
    assert m.reliability_polynomial(u)(r) == pytest.approx(m.probability(u, r), abs=1e-12)
    assert distinct_subfunctions(lambda y: m.eval(u, y), 6) == m.size(u)
