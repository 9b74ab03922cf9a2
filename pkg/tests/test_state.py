import pytest
from hypothesis import assume, given, strategies as st

from relaxnet.exceptions import DomainError
from relaxnet.state import (
    InvariantPair, PrimState, eigenvalues, from_conservative, from_invariants, in_domain,
    to_conservative, to_invariants,
)


class TestInvariants:
    @pytest.mark.parametrize("s, z, w", [((0.6, 0.24), 0.6, 0.36), ((0.0, 0.0), 0.0, 0.0), ((0.5, 0.25), 0.5, 0.25)])
    def test_to_invariants(self, s, z, w):
        p = to_invariants(PrimState(*s))
        assert p.z == pytest.approx(z, abs=1e-15)
        assert p.w == pytest.approx(w, abs=1e-15)

    @pytest.mark.parametrize(
        "p, rho, q",
        [((0.5, 0.36), 43 / 75, 16 / 75), ((0.0, 0.7), 0.7, 0.0), ((0.3, 0.0), 3 / 13, 3 / 13)],
    )
    def test_from_invariants(self, p, rho, q):
        s = from_invariants(InvariantPair(*p))
        assert s.rho == pytest.approx(rho, abs=1e-15)
        assert s.q == pytest.approx(q, abs=1e-15)

    def test_jam_with_flux_rejected(self):
        with pytest.raises(DomainError):
            to_invariants(PrimState(1.0, 0.1))

    def test_jam_without_flux(self):
        assert to_invariants(PrimState(1.0, 0.0)) == (0.0, 1.0)

    def test_bad_invariants(self):
        with pytest.raises(DomainError):
            from_invariants(InvariantPair(-0.5, 0.2))


class TestDomain:
    @pytest.mark.parametrize("s, expected", [((0.5, 0.25), True), ((0.5, 0.6), False), ((1.0, 0.0), True),
                                             ((0.3, -1e-13), True), ((1.1, 0.0), False)])
    def test_in_domain(self, s, expected):
        assert in_domain(PrimState(*s)) is expected


class TestEigenvalues:
    def test_values(self):
        assert eigenvalues(PrimState(0.6, 0.24)) == pytest.approx((-0.6, 1.0))
        assert eigenvalues(PrimState(0.3, 0.0)) == (0.0, 1.0)

    @given(st.floats(0.0, 0.999))
    def test_equilibrium(self, rho):
        assert eigenvalues(PrimState(rho, rho * (1 - rho)))[0] == pytest.approx(-rho, abs=1e-12)


states = st.tuples(st.floats(0.0, 0.999), st.floats(0.0, 1.0)).map(lambda t: PrimState(t[0], t[0] * t[1]))


@given(states)
def test_invariant_round_trip(s):
    back = from_invariants(to_invariants(s))
    assert back.rho == pytest.approx(s.rho, abs=1e-12)
    assert back.q == pytest.approx(s.q, abs=1e-12)


@given(states)
def test_conservative_round_trip(s):
    back = from_conservative(to_conservative(s))
    assert back.q == pytest.approx(s.q, abs=1e-12)


@given(st.floats(0.0, 50.0), st.floats(0.0, 1.0))
def test_invariants_map_into_domain(z, w):
    assert in_domain(from_invariants(InvariantPair(z, w)))
