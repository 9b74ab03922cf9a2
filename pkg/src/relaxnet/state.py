"""State representations of the relaxation system.

Three coordinate systems are used throughout:

* primitive ``(rho, q)``: density and flux,
* conservative ``(rho, z)`` with ``z = q / (1 - rho)``,
* Riemann invariants ``(z, w)`` with ``w = rho - q``.

``z`` is constant across 1-waves (speed ``-z``) and ``w`` across 2-waves
(speed 1). The traffic domain ``0 <= rho <= 1, 0 <= q <= rho`` is invariant.
"""

from typing import NamedTuple

from .exceptions import DomainError

TOL = 1e-12


class PrimState(NamedTuple):
    rho: float
    q: float


class ConsState(NamedTuple):
    rho: float
    z: float


class InvariantPair(NamedTuple):
    z: float
    w: float


def in_domain(s, tol=TOL):
    rho, q = s
    return -tol <= rho <= 1.0 + tol and -tol <= q <= rho + tol


def _z_of(rho, q):
    if rho >= 1.0:
        if q > TOL:
            raise DomainError(f"jammed state rho=1 must carry q=0, got q={q!r}")
        return 0.0
    return q / (1.0 - rho)


def to_invariants(s):
    if not in_domain(s):
        raise DomainError(f"state outside traffic domain: {tuple(s)!r}")
    rho, q = s
    return InvariantPair(_z_of(rho, q), rho - q)


def from_invariants(p):
    z, w = p
    if z < -TOL or w < -TOL or w > 1.0 + TOL:
        raise DomainError(f"invalid Riemann invariants: {tuple(p)!r}")
    z = max(z, 0.0)
    return PrimState((w + z) / (1.0 + z), z * (1.0 - w) / (1.0 + z))


def to_conservative(s):
    if not in_domain(s):
        raise DomainError(f"state outside traffic domain: {tuple(s)!r}")
    return ConsState(s[0], _z_of(*s))


def from_conservative(u):
    rho, z = u
    return PrimState(rho, z * (1.0 - rho))


def eigenvalues(s):
    """Characteristic speeds ``(-z, 1)``."""
    z = to_invariants(s).z
    return (-z, 1.0)
