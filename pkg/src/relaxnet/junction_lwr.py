"""Supply-demand coupling conditions for the LWR network."""

from typing import NamedTuple

from .diagram import FundamentalDiagram, QuadraticDiagram

_DEFAULT = QuadraticDiagram()


class Capacities(NamedTuple):
    c1: float
    c2: float
    c3: float


class LwrNodeFluxes(NamedTuple):
    C1: float
    C2: float
    C3: float


def demand(rho_b, diagram: FundamentalDiagram = _DEFAULT):
    """Largest flux an ingoing road with boundary trace ``rho_b`` can send."""
    if rho_b <= diagram.rho_star:
        return diagram.eval(rho_b)
    return diagram.sigma


def supply(rho_b, diagram: FundamentalDiagram = _DEFAULT):
    """Largest flux an outgoing road with boundary trace ``rho_b`` can take."""
    if rho_b <= diagram.rho_star:
        return diagram.sigma
    return diagram.eval(rho_b)


def merge_fair(c):
    c1, c2, c3 = c
    if c1 + c2 <= c3:
        return LwrNodeFluxes(c1, c2, c1 + c2)
    m = min(c1, c2, 0.5 * c3)
    C1 = min(c1, c3 - m)
    C2 = min(c2, c3 - m)
    return LwrNodeFluxes(C1, C2, C1 + C2)


def merge_priority_lwr(c):
    """Lane 1 has priority; lane 2 takes what is left, bounded by its own demand."""
    c1, c2, c3 = c
    C1 = min(c1, c3)
    C2 = min(c2, max(c3 - c1, 0.0))
    return LwrNodeFluxes(C1, C2, C1 + C2)


def diverge_alpha_lwr(c, alpha=0.5):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    c1, c2, c3 = c
    C1 = min(c1, c2 / alpha, c3 / (1.0 - alpha))
    C2 = alpha * C1
    return LwrNodeFluxes(C1, C2, C1 - C2)


def diverge_adaptive_lwr(c):
    c1, c2, c3 = c
    if c2 + c3 <= c1:
        return LwrNodeFluxes(c2 + c3, c2, c3)
    C2 = min(c2, c1 - min(c2, c3, 0.5 * c1))
    return LwrNodeFluxes(c1, C2, c1 - C2)
