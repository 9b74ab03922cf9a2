"""Randomized invariant suites behind ``relaxnet selftest``."""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .couplings import parse_coupling
from .diagram import FundamentalDiagram, QuadraticDiagram
from .exceptions import CouplingError, SimulationError
from .fv import cfl_dt, godunov_flux_lwr, make_network, step_network
from .junction_relax import DivergeInputs, MergeInputs, characteristic_residuals
from .layer import layer_fixed_points


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


_RELAX_COUPLINGS = {
    "merge": ("merge_flux_ratio", "merge_priority({P})"),
    "diverge": ("diverge_alpha({a})", "diverge_adaptive"),
}


def _random_density(rng):
    # a tenth of the draws hit the vacuum and jam states exactly
    u = rng.uniform()
    if u < 0.05:
        return 0.0
    if u < 0.1:
        return 1.0
    return float(rng.uniform())


def random_scenario(rng):
    topology = ("merge", "diverge")[rng.integers(2)]
    template = _RELAX_COUPLINGS[topology][rng.integers(2)]
    desc = template.format(P=round(float(rng.uniform()), 3), a=round(float(rng.uniform(0.05, 0.95)), 3))
    rho = tuple(_random_density(rng) for _ in range(3))
    eps = float(10.0 ** rng.uniform(-4, -1))
    return topology, desc, rho, eps


def domain_and_mass(n_scenarios=100, n_cells=100, t_end=0.5, seed=0, mass_tol=1e-13, tol=1e-12):
    """Step randomized relaxation networks and check the traffic domain and mass balance every step.

    Returns two suite results: domain preservation and junction conservation.
    """
    rng = np.random.default_rng(seed)
    d = QuadraticDiagram()
    violations, failures, steps, projected, max_proj = 0, [], 0, 0, 0.0
    worst_defect, worst_imbalance = 0.0, 0.0
    for k in range(n_scenarios):
        topology, desc, rho, eps = random_scenario(rng)
        net = make_network(rho, topology, parse_coupling(desc), d, eps, n_cells)
        try:
            while net.t < t_end - 1e-14:
                dt = min(cfl_dt(net), t_end - net.t)
                m0 = net.total_mass()
                net = step_network(net, dt)
                info = net.last_step
                steps += 1
                projected += info.projected_cells
                max_proj = max(max_proj, info.max_projection)
                for e in net.edges:
                    q = e.q
                    bad = (e.rho < -tol) | (e.rho > 1 + tol) | (q < -tol) | (q > e.rho + tol)
                    if np.any(bad):
                        violations += int(np.count_nonzero(bad))
                worst_defect = max(worst_defect, abs(net.total_mass() - m0 - info.outer_net_inflow(net.incoming) * dt))
                worst_imbalance = max(worst_imbalance, abs(info.junction_imbalance(net.incoming)))
        except (SimulationError, CouplingError) as exc:
            violations += 1
            failures.append(f"#{k} {desc} {rho}: {exc}")
    dom = SuiteResult(
        "invariant domain",
        violations == 0,
        f"{n_scenarios} randomized scenarios, {steps} steps, {violations} violations, "
        f"{projected} cell projections (largest {max_proj:.2g} in flux units)" + (f"; first failure {failures[0]}" if failures else ""),
    )
    worst = max(worst_defect, worst_imbalance)
    mass = SuiteResult(
        "junction mass conservation",
        worst <= mass_tol,
        f"max per-step mass defect {worst_defect:.3g}, max junction flux imbalance {worst_imbalance:.3g} (tol {mass_tol:g})",
    )
    return dom, mass


def junction_residuals(n_inputs=10_000, seed=1, tol=1e-12):
    """Flux balance and characteristic residuals of every relaxation junction solver."""
    rng = np.random.default_rng(seed)
    worst_bal, worst_char, errors = 0.0, 0.0, []
    for k in range(n_inputs):
        zs = rng.uniform(0.0, 3.0, 2)
        zs[rng.uniform(size=2) < 0.05] = 0.0
        ws = rng.uniform(0.0, 1.0, 2)
        ws[rng.uniform(size=2) < 0.05] = 0.0
        kind = k % 4
        if kind == 0:
            c, inp = parse_coupling("merge_flux_ratio"), MergeInputs(zs[0], zs[1], ws[0])
        elif kind == 1:
            c, inp = parse_coupling(f"merge_priority({rng.uniform()!r})"), MergeInputs(zs[0], zs[1], ws[0])
        elif kind == 2:
            c, inp = parse_coupling(f"diverge_alpha({rng.uniform(0.01, 0.99)!r})"), DivergeInputs(zs[0], ws[0], ws[1])
        else:
            c, inp = parse_coupling("diverge_adaptive"), DivergeInputs(zs[0], ws[0], ws[1])
        try:
            sol = c.solve(inp)
        except CouplingError as exc:
            errors.append(f"{c.descriptor}{tuple(inp)}: {exc}")
            continue
        worst_bal = max(worst_bal, abs(sol.balance_residual()))
        worst_char = max(worst_char, max(abs(r) for r in characteristic_residuals(sol, inp)))
    ok = not errors and worst_bal <= tol and worst_char <= tol
    detail = f"{n_inputs} inputs, max balance residual {worst_bal:.3g}, max characteristic residual {worst_char:.3g}"
    if errors:
        detail += f"; {len(errors)} solver errors, first {errors[0]}"
    return SuiteResult("junction residuals", ok, detail)


def fixed_points(n=1001, tol=1e-10):
    """Root-found layer fixed points of a generic diagram against the quadratic closed form."""
    generic = FundamentalDiagram(lambda r: r * (1.0 - r), lambda r: 1.0 - 2.0 * r, name="quadratic-generic")
    worst = 0.0
    for C in np.linspace(0.0, 0.25, n):
        a = layer_fixed_points(C)
        b = layer_fixed_points(C, generic)
        exact_lo = (1.0 - np.sqrt(max(1.0 - 4.0 * C, 0.0))) / 2.0
        worst = max(worst, abs(a.rho_minus - b.rho_minus), abs(a.rho_plus - b.rho_plus),
                    abs(a.rho_minus - exact_lo), abs(a.rho_plus - (1.0 - exact_lo)))
    return SuiteResult("layer fixed points", worst <= tol, f"{n} fluxes in [0, 1/4], max deviation {worst:.3g}")


# -- LWR grid convergence ---------------------------------------------------------------

_A, _B = 0.25, 0.15


def _rho0(x):
    return _A + _B * np.sin(2.0 * np.pi * x)


def _rho0_cell_avg(n):
    edges = np.linspace(0.0, 1.0, n + 1)
    h = 1.0 / n
    return _A - _B * (np.cos(2.0 * np.pi * edges[1:]) - np.cos(2.0 * np.pi * edges[:-1])) / (2.0 * np.pi * h)


def lwr_exact_periodic(x, t, iters=60):
    """Smooth characteristic solution of the periodic Greenshields problem before shock formation."""
    x = np.asarray(x, dtype=float)
    xi = x - (1.0 - 2.0 * _rho0(x)) * t
    for _ in range(iters):
        g = xi + (1.0 - 2.0 * _rho0(xi)) * t - x
        dg = 1.0 - 2.0 * t * _B * 2.0 * np.pi * np.cos(2.0 * np.pi * xi)
        xi = xi - g / dg
    return _rho0(xi)


def lwr_periodic_error(n, t_end=0.3, cfl=0.45):
    """L1 error of the Godunov LWR scheme on the periodic unit interval."""
    d = QuadraticDiagram()
    h = 1.0 / n
    rho = _rho0_cell_avg(n)
    t = 0.0
    speed = d.max_speed()
    while t < t_end - 1e-14:
        dt = min(cfl * h / speed, t_end - t)
        ext = np.concatenate(([rho[-1]], rho))
        f = godunov_flux_lwr(ext[:-1], ext[1:], d)
        f = np.append(f, f[0])
        rho = rho - dt / h * (f[1:] - f[:-1])
        t += dt
    # cell averages of the exact solution by 3-point Gauss quadrature
    xc = (np.arange(n) + 0.5) * h
    gp = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)]) * h / 2.0
    gw = np.array([5.0, 8.0, 5.0]) / 18.0
    exact = sum(w * lwr_exact_periodic(xc + p, t_end) for p, w in zip(gp, gw))
    return float(np.sum(np.abs(rho - exact)) * h)


def lwr_convergence(ns=(200, 400, 800), target=2.0, band=0.4):
    errs = [lwr_periodic_error(n) for n in ns]
    ratios = [a / b for a, b in zip(errs[:-1], errs[1:])]
    ok = all(abs(r - target) <= band for r in ratios)
    return SuiteResult(
        "LWR grid convergence",
        ok,
        "errors " + ", ".join(f"{e:.3g}" for e in errs) + "; ratios " + ", ".join(f"{r:.3f}" for r in ratios),
    )


def run_all(n_scenarios=100, n_inputs=10_000, seed=0, echo: Callable = print) -> List[SuiteResult]:
    results = list(domain_and_mass(n_scenarios=n_scenarios, seed=seed))
    results.append(junction_residuals(n_inputs=n_inputs, seed=seed + 1))
    results.append(fixed_points())
    results.append(lwr_convergence())
    if echo is not None:
        for r in results:
            echo(r.line())
    return results
