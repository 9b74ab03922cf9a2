"""Fundamental diagrams (density-flux maps) for scalar traffic flow."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .exceptions import DomainError

_DOMAIN_TOL = 1e-12
_ROOT_TOL = 1e-12


def _check_density(rho, allow_one=True):
    arr = np.asarray(rho, dtype=float)
    upper = 1.0 + _DOMAIN_TOL if allow_one else 1.0
    if np.any(~np.isfinite(arr)) or np.any(arr < -_DOMAIN_TOL) or np.any(arr > upper):
        raise DomainError(f"density outside [0, 1]: {rho!r}")
    return arr


@dataclass(frozen=True)
class SubcharacteristicReport:
    passed: bool
    first_violation: Optional[float] = None
    n_samples: int = 0

    def __bool__(self):
        return self.passed


class FundamentalDiagram:
    """Strictly concave flux ``F`` on ``[0, 1]`` with ``F(0) = F(1) = 0``.

    Only the flux is required. The derivative falls back to central
    differences, the critical density is located by golden-section search
    and the companion map ``tau`` by bracketed root finding.

    Parameters
    ----------
    flux : callable
        Vectorised map ``rho -> F(rho)``.
    derivative : callable, optional
        Vectorised ``F'``.
    name : str
        Label used in reports and scenario files.
    """

    def __init__(self, flux: Callable, derivative: Optional[Callable] = None, name: str = "custom"):
        self._flux = flux
        self._derivative = derivative
        self.name = name
        if abs(float(flux(0.0))) > 1e-14 or abs(float(flux(1.0))) > 1e-14:
            raise ValueError("fundamental diagram must vanish at rho=0 and rho=1")
        self.rho_star = self._find_rho_star()
        self.sigma = float(flux(self.rho_star))

    def _find_rho_star(self):
        if self._derivative is not None:
            # F' has a simple root at the maximum, so this is accurate to rounding
            d = lambda r: float(self._derivative(r))
            if d(0.0) > 0.0 > d(1.0):
                return float(optimize.brentq(d, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        # golden section on the flux itself resolves the maximiser only to ~sqrt(eps)
        res = optimize.minimize_scalar(
            lambda r: -float(self._flux(r)), bracket=(0.0, 0.5, 1.0),
            method="golden", tol=_ROOT_TOL,
        )
        return float(min(max(res.x, 0.0), 1.0))

    def eval(self, rho):
        arr = _check_density(rho)
        out = self._flux(np.clip(arr, 0.0, 1.0))
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    __call__ = eval

    def deriv(self, rho):
        arr = _check_density(rho)
        arr = np.clip(arr, 0.0, 1.0)
        if self._derivative is not None:
            out = self._derivative(arr)
        else:
            h = 1e-7
            lo = np.clip(arr - h, 0.0, 1.0)
            hi = np.clip(arr + h, 0.0, 1.0)
            out = (self._flux(hi) - self._flux(lo)) / (hi - lo)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    def tau(self, rho):
        """Density on the other side of ``rho_star`` carrying the same flux."""
        r = float(_check_density(rho))
        r = min(max(r, 0.0), 1.0)
        target = float(self._flux(r))
        if abs(r - self.rho_star) <= _ROOT_TOL:
            return self.rho_star
        g = lambda x: float(self._flux(x)) - target
        if r < self.rho_star:
            a, b = self.rho_star, 1.0
        else:
            a, b = 0.0, self.rho_star
        ga, gb = g(a), g(b)
        if ga == 0.0:
            return a
        if gb == 0.0:
            return b
        return float(optimize.brentq(g, a, b, xtol=_ROOT_TOL, rtol=4 * np.finfo(float).eps))

    def equilibrium_z(self, rho):
        """Equilibrium value ``F(rho) / (1 - rho)`` of the conserved invariant."""
        arr = _check_density(rho)
        if np.any(arr >= 1.0):
            raise DomainError("equilibrium_z is singular at rho = 1")
        arr = np.maximum(arr, 0.0)
        out = self._flux(arr) / (1.0 - arr)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    def equilibrium_z_limit(self, rho):
        # extends equilibrium_z to rho = 1 by its limit -F'(1); used by the source step
        arr = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
        jam = arr >= 1.0 - 1e-14
        safe = np.where(jam, 0.0, arr)
        out = np.where(jam, -float(self.deriv(1.0)), self._flux(safe) / (1.0 - safe))
        return float(out) if np.ndim(out) == 0 else out

    def max_speed(self, n_samples=2001):
        cache = self.__dict__.setdefault("_speed_cache", {})
        if n_samples not in cache:
            grid = np.linspace(0.0, 1.0, n_samples)
            cache[n_samples] = float(np.max(np.abs(self.deriv(grid))))
        return cache[n_samples]

    def check_subcharacteristic(self, n_samples=2001, tol=1e-12):
        """Check ``-F/(1-rho) <= F' <= 1`` on a uniform grid of ``[0, 1)``."""
        grid = np.linspace(0.0, 1.0, n_samples, endpoint=False)
        d = np.asarray(self.deriv(grid), dtype=float)
        lower = -np.asarray(self._flux(grid), dtype=float) / (1.0 - grid)
        bad = (d > 1.0 + tol) | (d < lower - tol)
        if np.any(bad):
            return SubcharacteristicReport(False, float(grid[np.argmax(bad)]), n_samples)
        return SubcharacteristicReport(True, None, n_samples)

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, rho_star={self.rho_star:.6g}, sigma={self.sigma:.6g})"


class QuadraticDiagram(FundamentalDiagram):
    """Greenshields flux ``F(rho) = rho (1 - rho)`` with closed forms."""

    def __init__(self):
        super().__init__(lambda r: r * (1.0 - r), lambda r: 1.0 - 2.0 * r, name="quadratic")

    def _find_rho_star(self):
        return 0.5

    def tau(self, rho):
        r = float(_check_density(rho))
        return 1.0 - min(max(r, 0.0), 1.0)

    def equilibrium_z_limit(self, rho):
        arr = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
        return float(arr) if np.ndim(arr) == 0 else arr


DIAGRAMS = {"quadratic": QuadraticDiagram}


def get_diagram(name="quadratic"):
    try:
        return DIAGRAMS[name]()
    except KeyError:
        raise ValueError(f"unknown diagram {name!r}; available: {sorted(DIAGRAMS)}") from None
