"""Exact junction Riemann solvers for the relaxation system.

Merge (2-in/1-out): ``z1, z2`` arrive from the ingoing roads and ``w3`` from
the outgoing road. Diverge (1-in/2-out): ``z1`` from the ingoing road and
``w2, w3`` from the outgoing roads. Every solver returns node states that
satisfy the characteristic equations of their road, balance the mass flux
and lie in the traffic domain.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Tuple

import numpy as np
from scipy import optimize

from .exceptions import CouplingError, DomainError
from .state import PrimState, in_domain

TOL = 1e-12


class MergeInputs(NamedTuple):
    z1: float
    z2: float
    w3: float


class DivergeInputs(NamedTuple):
    z1: float
    w2: float
    w3: float


@dataclass(frozen=True)
class NodeSolution:
    """Node states ``(rho^i, q^i)`` for edges 1, 2, 3."""

    rho: Tuple[float, float, float]
    q: Tuple[float, float, float]
    topology: str

    @property
    def states(self):
        return [PrimState(r, q) for r, q in zip(self.rho, self.q)]

    def balance_residual(self):
        r1, r2, r3 = self.q
        if self.topology == "merge":
            return r1 + r2 - r3
        return r1 - r2 - r3


def _check_z(z, name):
    if not np.isfinite(z) or z < -TOL:
        raise DomainError(f"{name} must be a non-negative invariant, got {z!r}")
    return max(float(z), 0.0)


def _check_w(w, name):
    if not np.isfinite(w) or w < -TOL or w > 1.0 + TOL:
        raise DomainError(f"{name} must lie in [0, 1], got {w!r}")
    return min(max(float(w), 0.0), 1.0)


def _merge_inputs(inp):
    z1, z2, w3 = inp
    return _check_z(z1, "z1"), _check_z(z2, "z2"), _check_w(w3, "w3")


def _diverge_inputs(inp):
    z1, w2, w3 = inp
    return _check_z(z1, "z1"), _check_w(w2, "w2"), _check_w(w3, "w3")


def q_max(z):
    """Largest flux on the 1-curve with invariant ``z``."""
    z = _check_z(z, "z")
    return z / (1.0 + z)


def outgoing_state(z, w):
    """Intersection of the 1-curve of ``z`` with the 2-curve of ``w``."""
    return (w + z) / (1.0 + z), z * (1.0 - w) / (1.0 + z)


def _rho_on_1curve(q, z, fallback):
    # zero invariant: the 1-curve is the line q = 0 and carries no density
    # information, so the node takes the density of the other side
    if z <= 0.0:
        return fallback
    qm = z / (1.0 + z)
    if q >= qm:
        return qm
    return 1.0 - q / z


def characteristic_residuals(sol, inp):
    """Per-edge residuals of the characteristic equations."""
    (r1, r2, r3), (q1, q2, q3) = sol.rho, sol.q
    if sol.topology == "merge":
        z1, z2, w3 = inp
        return (
            q1 - z1 * (1.0 - r1) if z1 > 0 else q1,
            q2 - z2 * (1.0 - r2) if z2 > 0 else q2,
            q3 - (r3 - w3),
        )
    z1, w2, w3 = inp
    return (
        q1 - z1 * (1.0 - r1) if z1 > 0 else q1,
        q2 - (r2 - w2),
        q3 - (r3 - w3),
    )


def _finish(rho, q, topology):
    sol = NodeSolution(tuple(float(r) for r in rho), tuple(float(x) for x in q), topology)
    for i, s in enumerate(sol.states, start=1):
        if not in_domain(s):
            raise CouplingError(f"edge {i} node state {tuple(s)} outside the traffic domain")
    return sol


# -- merging junctions -------------------------------------------------------

def sum_invariants(z1, z2, w3):
    return z1 + z2


def flux_ratio_rule(ratio=None):
    """Flux rule ``q1 / q2 = f`` with ``f = z1 / z2`` unless given."""

    def rule(q3, z1, z2, w3):
        f = ratio(z1, z2, w3) if ratio is not None else None
        if f is None:
            if z1 + z2 <= 0.0:
                return 0.0
            if z2 <= 0.0:
                return q3
            f = z1 / z2
        if np.isinf(f):
            return q3
        return f / (1.0 + f) * q3

    return rule


def priority_rule(P):
    """Partial priority: convex combination of full priority for lane 1 and lane 2."""
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"priority weight must lie in [0, 1], got {P!r}")

    def rule(q3, z1, z2, w3):
        qb1 = min(q3, z1 / (1.0 + z1))
        qb2 = min(q3, z2 / (1.0 + z2))
        return (1.0 - P) * qb1 + P * (q3 - qb2)

    return rule


def merge_general(inp, g: Callable = sum_invariants, rule: Callable = None):
    """Generic merge pipeline.

    ``z3 = g(z1, z2, w3)`` fixes the outgoing node state, ``rule(q3, z1, z2, w3)``
    returns ``q1``, the balance gives ``q2`` and the densities of the
    ingoing roads follow from their characteristic equations.
    """
    z1, z2, w3 = _merge_inputs(inp)
    rule = rule or flux_ratio_rule()
    z3 = float(g(z1, z2, w3))
    if not np.isfinite(z3) or z3 < 0.0:
        raise CouplingError(f"invariant combiner returned z3={z3!r}")
    rho3, q3 = outgoing_state(z3, w3)
    q1 = float(rule(q3, z1, z2, w3))
    if not np.isfinite(q1) or q1 < -TOL or q1 > q3 + TOL:
        raise CouplingError(f"flux rule returned q1={q1!r} outside [0, q3={q3!r}]")
    q1 = min(max(q1, 0.0), q3)
    q2 = q3 - q1
    for q, z, i in ((q1, z1, 1), (q2, z2, 2)):
        if q > z / (1.0 + z) + TOL:
            raise CouplingError(f"edge {i} flux {q!r} exceeds the maximum {z / (1.0 + z)!r} of its 1-curve")
    rho1 = _rho_on_1curve(q1, z1, rho3)
    rho2 = _rho_on_1curve(q2, z2, rho3)
    return _finish((rho1, rho2, rho3), (q1, q2, q3), "merge")


def merge_flux_ratio(inp):
    """Merge with ``z3 = z1 + z2`` and ``q1 / q2 = z1 / z2``; all node densities coincide."""
    z1, z2, w3 = _merge_inputs(inp)
    z3 = z1 + z2
    rho, q3 = outgoing_state(z3, w3)
    if z3 <= 0.0:
        return _finish((rho, rho, rho), (0.0, 0.0, 0.0), "merge")
    q1 = z1 / z3 * q3
    q2 = q3 - q1
    return _finish((rho, rho, rho), (q1, q2, q3), "merge")


def merge_priority(inp, P=0.0):
    """Merge with ``z3 = z1 + z2`` and partial priority ``P`` (``P = 0``: lane 1 has priority)."""
    return merge_general(inp, sum_invariants, priority_rule(P))


# -- diverging junctions -----------------------------------------------------

def _diverge_residual(q, z1, a, b):
    return z1 * (a - q) * (b - q) - q * ((a + b) - 2.0 * q)


def diverge_root_bisect(z1, a, b, xtol=1e-14):
    """Root of the diverge relation in ``[0, min(a, b)]`` by bisection."""
    m = min(a, b)
    if m <= 0.0 or z1 <= 0.0:
        return 0.0
    fm = _diverge_residual(m, z1, a, b)
    if fm >= 0.0:
        # only for a == b: the residual factors as (a - q)(z1 (a - q) - 2 q) and
        # q = a is the excluded endpoint root
        return z1 * m / (z1 + 2.0)
    return float(optimize.bisect(_diverge_residual, 0.0, m, args=(z1, a, b), xtol=xtol, maxiter=200))


def diverge_root(z1, a, b):
    """Smaller root of ``(z1 + 2) q^2 - (z1 + 1)(a + b) q + z1 a b = 0``.

    Written as ``2c / (B + sqrt(D))`` to avoid cancellation; falls back to
    bisection when the discriminant degenerates.
    """
    if z1 <= 0.0 or min(a, b) <= 0.0:
        return 0.0
    A = z1 + 2.0
    B = (z1 + 1.0) * (a + b)
    c = z1 * a * b
    D = B * B - 4.0 * A * c
    if D < 1e-14:
        return diverge_root_bisect(z1, a, b)
    return 2.0 * c / (B + np.sqrt(D))


def diverge_preferences(inp, alpha=0.5):
    """Diverge with fixed split ``q2 = alpha q1`` and ``z1 = z2 + z3`` while admissible."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    z1, w2, w3 = _diverge_inputs(inp)
    a = (1.0 - w2) / alpha
    b = (1.0 - w3) / (1.0 - alpha)
    qbar = diverge_root(z1, a, b)
    q1 = min(z1 / (1.0 + z1), qbar)
    q2 = alpha * q1
    q3 = q1 - q2
    rho2, rho3 = w2 + q2, w3 + q3
    rho1 = _rho_on_1curve(q1, z1, 0.5 * (rho2 + rho3))
    return _finish((rho1, rho2, rho3), (q1, q2, q3), "diverge")


def diverge_adaptive(inp):
    """Diverge with additive split ``q2 - q3 = w3 - w2`` and ``z1 = z2 + z3`` while admissible.

    The split difference is saturated to ``[-q1, q1]`` so that neither
    outgoing flux turns negative.
    """
    z1, w2, w3 = _diverge_inputs(inp)
    s = w2 + w3
    qm = z1 / (1.0 + z1)
    if s >= qm:
        q1 = (2.0 - s) * z1 / (2.0 + z1)
    else:
        q1 = qm
    f = min(max(w3 - w2, -q1), q1)
    q2 = 0.5 * (q1 + f)
    q3 = q1 - q2
    rho2, rho3 = w2 + q2, w3 + q3
    rho1 = _rho_on_1curve(q1, z1, 0.5 * (rho2 + rho3))
    return _finish((rho1, rho2, rho3), (q1, q2, q3), "diverge")
