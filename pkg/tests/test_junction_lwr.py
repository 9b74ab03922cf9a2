import pytest
from hypothesis import given, strategies as st

from relaxnet.junction_lwr import (
    Capacities, demand, diverge_adaptive_lwr, diverge_alpha_lwr, merge_fair, merge_priority_lwr, supply,
)

caps = st.tuples(*(st.floats(0.0, 0.25),) * 3).map(lambda t: Capacities(*t))
SOLVERS = {
    "fair": (merge_fair, "merge"),
    "priority": (merge_priority_lwr, "merge"),
    "alpha": (lambda c: diverge_alpha_lwr(c, 0.3), "diverge"),
    "adaptive": (diverge_adaptive_lwr, "diverge"),
}


@pytest.mark.parametrize("rho, expected", [(0.1, 0.09), (0.7, 0.25), (0.0, 0.0)])
def test_demand(rho, expected):
    assert demand(rho) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("rho, expected", [(0.2, 0.25), (0.95, 0.0475), (1.0, 0.0)])
def test_supply(rho, expected):
    assert supply(rho) == pytest.approx(expected, abs=1e-15)


class TestMergeFair:
    @pytest.mark.parametrize(
        "c, expected",
        [((0.09, 0.1275, 0.25), (0.09, 0.1275, 0.2175)),
         ((0.25, 0.25, 0.25), (0.125, 0.125, 0.25)),
         ((0.0475, 0.25, 0.25), (0.0475, 0.2025, 0.25))],
    )
    def test_examples(self, c, expected):
        assert merge_fair(Capacities(*c)) == pytest.approx(expected, abs=1e-15)

    @given(caps)
    def test_symmetric(self, c):
        a = merge_fair(c)
        b = merge_fair(Capacities(c.c2, c.c1, c.c3))
        assert (a.C1, a.C2, a.C3) == pytest.approx((b.C2, b.C1, b.C3), abs=1e-15)


class TestMergePriority:
    @pytest.mark.parametrize(
        "c, expected",
        [((0.25, 0.25, 0.25), (0.25, 0.0, 0.25)),
         ((0.24, 0.24, 0.21), (0.21, 0.0, 0.21)),
         ((0.05, 0.2, 0.25), (0.05, 0.2, 0.25))],
    )
    def test_examples(self, c, expected):
        assert merge_priority_lwr(Capacities(*c)) == pytest.approx(expected, abs=1e-15)


class TestDiverge:
    def test_alpha_dense(self):
        C = diverge_alpha_lwr(Capacities(0.25, 0.09, 0.21), 0.5)
        assert C.C1 == pytest.approx(0.18, abs=1e-15)

    def test_alpha_blocked(self):
        assert diverge_alpha_lwr(Capacities(0.24, 0.09, 0.25), 0.5) == pytest.approx((0.18, 0.09, 0.09), abs=1e-15)

    def test_alpha_no_demand(self):
        assert diverge_alpha_lwr(Capacities(0.0, 0.2, 0.2), 0.5) == (0.0, 0.0, 0.0)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            diverge_alpha_lwr(Capacities(0.1, 0.1, 0.1), 0.0)

    @pytest.mark.parametrize(
        "c, expected",
        [((0.25, 0.25, 0.25), (0.25, 0.125, 0.125)),
         ((0.24, 0.25, 0.0475), (0.24, 0.1925, 0.0475)),
         ((0.1, 0.04, 0.04), (0.08, 0.04, 0.04))],
    )
    def test_adaptive(self, c, expected):
        assert diverge_adaptive_lwr(Capacities(*c)) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("name", sorted(SOLVERS))
@given(c=caps)
def test_fluxes_bounded_and_balanced(name, c):
    solve, topology = SOLVERS[name]
    C = solve(c)
    for Ci, ci in zip(C, c):
        assert -1e-15 <= Ci <= ci + 1e-15
    bal = C.C1 + C.C2 - C.C3 if topology == "merge" else C.C1 - C.C2 - C.C3
    assert abs(bal) <= 1e-15


@pytest.mark.parametrize("name", sorted(SOLVERS))
@given(c=caps, d=st.tuples(*(st.floats(-1e-7, 1e-7),) * 3))
def test_continuity(name, c, d):
    solve, _ = SOLVERS[name]
    c2 = Capacities(*(min(max(a + b, 0.0), 0.25) for a, b in zip(c, d)))
    # every rule is Lipschitz in the capacities
    lip = 4.0
    assert max(abs(a - b) for a, b in zip(solve(c), solve(c2))) <= lip * max(abs(a - b) for a, b in zip(c, c2)) + 1e-15
