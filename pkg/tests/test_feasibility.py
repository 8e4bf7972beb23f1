import itertools
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from retractlab.feasibility import Constraint, feasible, lower, pair_sum_at_least, upper

F = Fraction


def test_simple_systems():
    # 0 < x < 1 and x + y >= 3 with y <= 3
    cons = [lower(2, 0, 0, True), upper(2, 0, 1, True), pair_sum_at_least(2, 0, 1, 3), upper(2, 1, 3)]
    xs = feasible(cons, 2)
    assert xs is not None and all(c.holds(xs) for c in cons)
    assert feasible([lower(1, 0, 1), upper(1, 0, 1, True)], 1) is None
    assert feasible([lower(1, 0, 1), upper(1, 0, 1)], 1) == (1,)


coeff = st.integers(-2, 2)


@st.composite
def systems(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 5))
    cons = [Constraint(tuple(draw(coeff) for _ in range(n)), draw(st.integers(-3, 3)),
                       draw(st.booleans())) for _ in range(m)]
    return n, cons


@settings(max_examples=100, deadline=None)
@given(systems())
def test_agrees_with_grid_search(sys_):
    n, cons = sys_
    xs = feasible(cons, n)
    if xs is not None:
        assert all(c.holds(xs) for c in cons)
    # any grid point that works proves feasibility
    grid = [F(k, 2) for k in range(-8, 9)]
    hit = next((p for p in itertools.product(grid, repeat=n) if all(c.holds(p) for c in cons)), None)
    if hit is not None:
        assert xs is not None
