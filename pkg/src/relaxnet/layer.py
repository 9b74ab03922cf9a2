"""Boundary layers at the junction and the matching that yields the limit coupling.

In the stretched variable ``y = x / epsilon`` the density inside a layer
with flux ``C`` solves

    left layer (outgoing edge):   rho' =  (1 - rho)(F(rho) - C) / C
    right layer (ingoing edge):  -rho' =  (1 - rho)(F(rho) - C) / C

whose fixed points are the two roots ``rho_- <= rho_* <= rho_+`` of
``F(rho) = C``. On the left ``rho_+`` attracts ``(rho_-, 1)``, on the right
``rho_-`` attracts ``[0, rho_+)``.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize

from .diagram import FundamentalDiagram, QuadraticDiagram
from .exceptions import DomainError
from .junction_lwr import demand, supply
from .junction_relax import MergeInputs, merge_flux_ratio
from .state import PrimState

_DEFAULT = QuadraticDiagram()
_SIDES = ("left", "right")


class LayerFixedPoints(NamedTuple):
    rho_minus: float
    rho_plus: float
    C: float


def layer_fixed_points(C, diagram: FundamentalDiagram = _DEFAULT):
    """Both roots of ``F(rho) = C`` for ``0 <= C <= sigma``.

    >>> layer_fixed_points(0.1875)
    LayerFixedPoints(rho_minus=0.25, rho_plus=0.75, C=0.1875)
    """
    C = float(C)
    sigma, rs = diagram.sigma, diagram.rho_star
    if C < 0.0 or not np.isfinite(C):
        raise DomainError(f"layer flux must be non-negative, got {C!r}")
    if C > sigma + 1e-14:
        raise DomainError(f"F(rho) = {C!r} has no root: the capacity is {sigma!r}")
    if C >= sigma:
        return LayerFixedPoints(rs, rs, C)
    if C == 0.0:
        return LayerFixedPoints(0.0, 1.0, C)
    if isinstance(diagram, QuadraticDiagram):
        root = np.sqrt(1.0 - 4.0 * C)
        # rho_- via the product of roots, which avoids cancellation for small C
        lo = 2.0 * C / (1.0 + root)
        return LayerFixedPoints(float(lo), float(1.0 - lo), C)
    g = lambda r: diagram.eval(r) - C
    lo = optimize.brentq(g, 0.0, rs, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    hi = optimize.brentq(g, rs, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return LayerFixedPoints(float(lo), float(hi), C)


def rho_minus(C, diagram: FundamentalDiagram = _DEFAULT):
    return layer_fixed_points(C, diagram).rho_minus


def rho_plus(C, diagram: FundamentalDiagram = _DEFAULT):
    return layer_fixed_points(C, diagram).rho_plus


# -- layer ODE ---------------------------------------------------------------------

@dataclass(frozen=True)
class LayerProfile:
    """RK4 trajectory of a layer ODE.

    ``fixed_point`` is the fixed point within 1e-6 of the terminal value,
    or None. ``diverged`` flags a trajectory that left ``[0, 1]``.
    """

    y: np.ndarray
    rho: np.ndarray
    side: str
    C: float
    terminal: float
    fixed_point: Optional[float]
    converged: bool
    diverged: bool


def layer_rhs(rho, C, side, diagram: FundamentalDiagram = _DEFAULT):
    sign = 1.0 if side == "left" else -1.0
    return sign * (1.0 - rho) * (diagram.eval(np.clip(rho, 0.0, 1.0)) - C) / C


def integrate_layer(rho0, C, side, y_max=50.0, dy=1e-3, diagram: FundamentalDiagram = _DEFAULT, conv_tol=1e-6):
    """Integrate the layer ODE from ``rho0`` on ``[0, y_max]`` with classical RK4."""
    if side not in _SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if not C > 0.0:
        raise DomainError(f"layer flux must be positive, got {C!r}")
    if not 0.0 <= rho0 <= 1.0:
        raise DomainError(f"initial layer density must lie in [0, 1], got {rho0!r}")
    fp = layer_fixed_points(C, diagram)
    n = int(np.ceil(y_max / dy))
    h = y_max / n
    sign = 1.0 if side == "left" else -1.0
    F = diagram._flux  # raw scalar flux; the loop below is the hot path

    def f(r):
        rc = min(max(r, 0.0), 1.0)
        return sign * (1.0 - r) * (F(rc) - C) / C

    rho = np.empty(n + 1)
    rho[0] = r = float(rho0)
    diverged = False
    last = n
    for k in range(n):
        k1 = f(r)
        k2 = f(r + 0.5 * h * k1)
        k3 = f(r + 0.5 * h * k2)
        k4 = f(r + h * k3)
        r = r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho[k + 1] = r
        if r < -1e-12 or r > 1.0 + 1e-12:
            diverged, last = True, k + 1
            break
    rho = rho[: last + 1]
    y = np.linspace(0.0, last * h, last + 1)
    terminal = float(rho[-1])
    fixed = None
    if not diverged:
        # rho = 1 is a fixed point of both ODEs as well
        cands = (fp.rho_minus, fp.rho_plus, 1.0)
        best = min(cands, key=lambda c: abs(c - terminal))
        if abs(best - terminal) < conv_tol:
            fixed = float(best)
    return LayerProfile(y, rho, side, float(C), terminal, fixed, fixed is not None, diverged)


# -- half-Riemann problems -------------------------------------------------------

def half_riemann_admissible(side, rho_B, rho_K, diagram: FundamentalDiagram = _DEFAULT, tol=1e-12):
    """Whether ``rho_K`` can be joined to the trace ``rho_B`` by waves leaving the domain.

    ``side="left"`` is the left boundary of an edge (waves with non-negative
    speed), ``side="right"`` the right boundary (non-positive speed).
    """
    if side not in _SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    rs = diagram.rho_star
    if side == "left":
        if rho_B <= rs:
            return -tol <= rho_K <= rs + tol
        return -tol <= rho_K <= diagram.tau(rho_B) + tol or abs(rho_K - rho_B) <= tol
    if rho_B >= rs:
        return rs - tol <= rho_K <= 1.0 + tol
    return abs(rho_K - rho_B) <= tol or diagram.tau(rho_B) - tol <= rho_K <= 1.0 + tol


# -- matching for the fair merge ------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    """Limit fluxes and layer data of the fair merge.

    ``case_tag`` gives per edge whether the layer sits on its unstable
    fixed point (``U``, trivial layer) or runs into the stable one
    (``S``). ``rp_case`` records per edge whether the boundary trace is
    free (1) or congested (2) relative to the half-Riemann problem, and
    ``rho_K`` the layer limits handed to the outer solutions.
    """

    C1: float
    C2: float
    C3: float
    rho0: float
    case_tag: str
    rp_case: Tuple[int, int, int]
    rho_K: Tuple[float, float, float]

    @property
    def fluxes(self):
        return (self.C1, self.C2, self.C3)


# Checked in this order; the first admissible configuration wins, which
# makes boundary triples resolve toward UUS deterministically.
_CASE_ORDER = ("UUS", "USS", "SUS", "SSU")


def _case_fluxes(tag, c1, c2, c3):
    """Fluxes of a stability configuration, or None when it is not admissible."""
    if tag == "UUS":
        if c1 >= 0.5 * c3 and c2 >= 0.5 * c3:
            return 0.5 * c3, 0.5 * c3
    elif tag == "USS":
        if c2 <= 0.5 * c3 and c1 + c2 >= c3:
            return c3 - c2, c2
    elif tag == "SUS":
        if c1 <= 0.5 * c3 and c1 + c2 >= c3:
            return c1, c3 - c1
    elif tag == "SSU":
        if c1 + c2 <= c3:
            return c1, c2
    return None


def _node_value(tag, C1, C2, C3, diagram):
    if tag in ("UUS", "USS"):
        return rho_plus(C1, diagram)
    if tag == "SUS":
        return rho_plus(C2, diagram)
    return rho_minus(C3, diagram)


def _layer_limit(letter, incoming, C, diagram):
    fp = layer_fixed_points(C, diagram)
    # ingoing edges carry right layers (stable rho_-), outgoing edges left layers (stable rho_+)
    if incoming:
        return fp.rho_plus if letter == "U" else fp.rho_minus
    return fp.rho_minus if letter == "U" else fp.rho_plus


def match_fair_merge(rho_B1, rho_B2, rho_B3, diagram: FundamentalDiagram = _DEFAULT):
    """Match the junction layers of the fair-ratio merge in the zero-relaxation limit.

    Ingoing edges offer their demand, the outgoing edge its supply. Of the
    eight stability combinations only UUS, USS, SUS and SSU can carry a
    consistent common node value; the remaining ones either force
    ``C1 + C2 != C3`` or put the node outside every attraction domain.

    >>> m = match_fair_merge(0.2, 0.3, 0.6)
    >>> m.case_tag, round(m.rho0, 6)
    ('UUS', 0.860555)
    """
    for r in (rho_B1, rho_B2, rho_B3):
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"boundary densities must lie in [0, 1], got {r!r}")
    c1, c2, c3 = demand(rho_B1, diagram), demand(rho_B2, diagram), supply(rho_B3, diagram)
    for tag in _CASE_ORDER:
        fl = _case_fluxes(tag, c1, c2, c3)
        if fl is None:
            continue
        C1, C2 = fl
        C3 = C1 + C2
        rho0 = _node_value(tag, C1, C2, C3, diagram)
        rs = diagram.rho_star
        rp = (1 if rho_B1 <= rs else 2, 1 if rho_B2 <= rs else 2, 1 if rho_B3 >= rs else 2)
        rho_K = tuple(
            _layer_limit(letter, inc, C, diagram)
            for letter, inc, C in zip(tag, (True, True, False), (C1, C2, C3))
        )
        return MatchResult(float(C1), float(C2), float(C3), float(rho0), tag, rp, tuple(float(r) for r in rho_K))
    raise AssertionError("stability configurations are exhaustive")  # pragma: no cover


def relax_node_state_fair(rho_B1, rho_B2, rho_B3, diagram: FundamentalDiagram = _DEFAULT):
    """Node state of the fair-ratio relaxation coupling for equilibrium traces."""
    for r in (rho_B1, rho_B2, rho_B3):
        if not 0.0 <= r < 1.0:
            raise DomainError(f"boundary densities must lie in [0, 1), got {r!r}")
    z1 = diagram.equilibrium_z(rho_B1)
    z2 = diagram.equilibrium_z(rho_B2)
    w3 = rho_B3 - diagram.eval(rho_B3)
    sol = merge_flux_ratio(MergeInputs(z1, z2, w3))
    return PrimState(sol.rho[2], sol.q[2])


MATCH_COLUMNS = ("rho_B1", "rho_B2", "rho_B3", "C1", "C2", "C3", "rho0", "case_tag")


def matching_table(n=21, diagram: FundamentalDiagram = _DEFAULT):
    """Rows of the matching on an ``n^3`` uniform grid of boundary densities."""
    if n < 2:
        raise ValueError("grid needs at least 2 points per axis")
    grid = np.linspace(0.0, 1.0, n)
    rows = []
    for a in grid:
        for b in grid:
            for c in grid:
                m = match_fair_merge(float(a), float(b), float(c), diagram)
                rows.append((float(a), float(b), float(c), m.C1, m.C2, m.C3, m.rho0, m.case_tag))
    return rows
