"""First-order Godunov schemes for the relaxation system and the LWR equation on a junction.

Every edge is the unit interval split into ``n_cells`` cells. Ingoing edges
touch the junction at ``x = 1``, outgoing edges at ``x = 0``. The outer
ends use zero-order extrapolation.

The relaxation system is advanced in its conservative variables
``(rho, z)`` by exact two-contact Riemann fluxes, followed by the exact
solution of the stiff source at frozen density.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .couplings import Coupling
from .diagram import FundamentalDiagram
from .exceptions import SimulationError
from .junction_lwr import Capacities

DOMAIN_TOL = 1e-12
_TOPOLOGY_INCOMING = {"merge": (True, True, False), "diverge": (True, False, False)}


# -- fluxes ------------------------------------------------------------------

def godunov_flux_lwr(rho_l, rho_r, diagram: FundamentalDiagram):
    """``min(demand(rho_l), supply(rho_r))``; exact Godunov flux for a concave diagram."""
    rho_l = np.asarray(rho_l, dtype=float)
    rho_r = np.asarray(rho_r, dtype=float)
    dem = np.where(rho_l <= diagram.rho_star, diagram.eval(np.clip(rho_l, 0, 1)), diagram.sigma)
    sup = np.where(rho_r <= diagram.rho_star, diagram.sigma, diagram.eval(np.clip(rho_r, 0, 1)))
    out = np.minimum(dem, sup)
    return float(out) if out.ndim == 0 else out


def godunov_flux_relax(rho_l, z_l, rho_r, z_r):
    """Exact interface flux of the relaxation system in conservative form.

    The 1-contact (speed ``-z <= 0``) and the 2-contact (speed 1) bracket
    the interface, so the sampled state is the middle state carrying ``z``
    from the left and ``w = rho - q`` from the right.

    Returns
    -------
    (mass_flux, z_flux)
    """
    z_l = np.asarray(z_l, dtype=float)
    w_r = np.asarray(rho_r, dtype=float) - np.asarray(z_r, dtype=float) * (1.0 - np.asarray(rho_r, dtype=float))
    mass = z_l * (1.0 - w_r) / (1.0 + z_l)
    if mass.ndim == 0:
        return float(mass), float(z_l)
    return mass, z_l.copy()


def relax_source_step(rho, z, dt, epsilon, diagram: FundamentalDiagram):
    """Exact update of ``z' = -(z - Z(rho)) / epsilon`` at frozen density."""
    zeq = diagram.equilibrium_z_limit(rho)
    return zeq + (np.asarray(z, dtype=float) - zeq) * np.exp(-dt / epsilon)


# -- network containers --------------------------------------------------------

@dataclass
class EdgeGrid:
    """Cell averages on one edge of unit length.

    ``z`` is ``None`` for the LWR model. ``incoming`` is True when the
    junction sits at the right end of the edge.
    """

    rho: np.ndarray
    z: Optional[np.ndarray]
    incoming: bool
    length: float = 1.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.z is not None:
            self.z = np.asarray(self.z, dtype=float)
        if self.rho.size < 2:
            raise ValueError("an edge needs at least 2 cells")

    @property
    def n_cells(self):
        return self.rho.size

    @property
    def dx(self):
        return self.length / self.n_cells

    @property
    def x(self):
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def q(self):
        if self.z is None:
            raise AttributeError("LWR edges carry no relaxation flux")
        return self.z * (1.0 - self.rho)

    @property
    def node_index(self):
        return -1 if self.incoming else 0

    def copy(self):
        return EdgeGrid(self.rho.copy(), None if self.z is None else self.z.copy(), self.incoming, self.length)


@dataclass
class StepInfo:
    """Diagnostics of one time step."""

    dt: float
    node_rho: Tuple[float, float, float]
    node_flux: Tuple[float, float, float]
    outer_flux: Tuple[float, float, float]
    projected_cells: int = 0
    max_projection: float = 0.0

    def junction_imbalance(self, incoming):
        inflow = sum(f for f, inc in zip(self.node_flux, incoming) if inc)
        outflow = sum(f for f, inc in zip(self.node_flux, incoming) if not inc)
        return inflow - outflow

    def outer_net_inflow(self, incoming):
        # ingoing edges receive at x=0, outgoing edges release at x=1
        return sum(f if inc else -f for f, inc in zip(self.outer_flux, incoming))


@dataclass
class Network:
    """A single junction with three edges.

    ``epsilon`` is the relaxation time and must be set for the relaxation
    model; it is ignored by the LWR model.
    """

    edges: List[EdgeGrid]
    topology: str
    coupling: Coupling
    diagram: FundamentalDiagram
    epsilon: Optional[float] = None
    t: float = 0.0
    last_step: Optional[StepInfo] = field(default=None, repr=False)

    def __post_init__(self):
        if self.topology not in _TOPOLOGY_INCOMING:
            raise ValueError(f"topology must be 'merge' or 'diverge', got {self.topology!r}")
        if len(self.edges) != 3:
            raise ValueError("a junction network has exactly three edges")
        if self.coupling.topology != self.topology:
            raise ValueError(f"coupling {self.coupling.name!r} does not fit a {self.topology} junction")
        if tuple(e.incoming for e in self.edges) != _TOPOLOGY_INCOMING[self.topology]:
            raise ValueError("edge orientation does not match the topology")
        if self.model == "relaxation":
            if self.epsilon is None or not self.epsilon > 0.0:
                raise ValueError("relaxation networks need epsilon > 0")
            if any(e.z is None for e in self.edges):
                raise ValueError("relaxation networks need z on every edge")

    @property
    def model(self):
        return self.coupling.model

    @property
    def incoming(self):
        return tuple(e.incoming for e in self.edges)

    def total_mass(self):
        return float(sum(np.sum(e.rho) * e.dx for e in self.edges))

    def copy(self):
        return replace(self, edges=[e.copy() for e in self.edges], last_step=None)


def make_network(rho_init, topology, coupling, diagram, epsilon=None, n_cells=1000):
    """Constant initial densities per edge; relaxation data start in equilibrium."""
    incoming = _TOPOLOGY_INCOMING[topology]
    edges = []
    for rho0, inc in zip(rho_init, incoming):
        rho = np.full(n_cells, float(rho0))
        z = None
        if coupling.model == "relaxation":
            z = np.full(n_cells, diagram.equilibrium_z_limit(float(rho0)))
        edges.append(EdgeGrid(rho, z, inc))
    return Network(edges, topology, coupling, diagram, epsilon)


# -- time stepping ---------------------------------------------------------------

def cfl_dt(net: Network, cfl=0.45):
    if not net.edges:
        raise ValueError("empty network")
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl!r}")
    dx = min(e.dx for e in net.edges)
    if net.model == "relaxation":
        speed = max(1.0, max(float(np.max(e.z)) for e in net.edges))
    else:
        speed = net.diagram.max_speed()
    return cfl * dx / speed


def _z_from_prim(rho, q):
    return 0.0 if rho >= 1.0 else q / (1.0 - rho)


def junction_traces(net: Network):
    """Invariants (relaxation) or capacities (LWR) seen by the junction."""
    d = net.diagram
    if net.model == "relaxation":
        out = []
        for e in net.edges:
            rho, z = e.rho[e.node_index], e.z[e.node_index]
            out.append(z if e.incoming else rho - z * (1.0 - rho))
        return tuple(float(v) for v in out)
    caps = []
    for e in net.edges:
        rho = float(e.rho[e.node_index])
        if e.incoming:
            caps.append(d.sigma if rho > d.rho_star else d.eval(rho))
        else:
            caps.append(d.sigma if rho <= d.rho_star else d.eval(rho))
    return Capacities(*caps)


def _check_edge(net, k, e):
    bad = ~np.isfinite(e.rho) | (e.rho < -DOMAIN_TOL) | (e.rho > 1.0 + DOMAIN_TOL)
    if e.z is not None:
        bad |= ~np.isfinite(e.z) | (e.z < -DOMAIN_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        zi = None if e.z is None else float(e.z[i])
        raise SimulationError(
            f"domain violation at t={net.t:.6g} on edge {k + 1}, cell {i}: rho={e.rho[i]!r}, z={zi!r}"
        )


def _step_relax(net: Network, dt):
    sol = net.coupling.solve(junction_traces(net))
    new_edges, node_flux, outer_flux = [], [], []
    projected, max_proj = 0, 0.0
    for e, rho_n, q_n in zip(net.edges, sol.rho, sol.q):
        z_n = _z_from_prim(rho_n, q_n)
        if e.incoming:
            rho_ext = np.concatenate(([e.rho[0]], e.rho, [rho_n]))
            z_ext = np.concatenate(([e.z[0]], e.z, [z_n]))
        else:
            rho_ext = np.concatenate(([rho_n], e.rho, [e.rho[-1]]))
            z_ext = np.concatenate(([z_n], e.z, [e.z[-1]]))
        fm, fz = godunov_flux_relax(rho_ext[:-1], z_ext[:-1], rho_ext[1:], z_ext[1:])
        lam = dt / e.dx
        rho = e.rho - lam * (fm[1:] - fm[:-1])
        z = e.z - lam * (fz[1:] - fz[:-1])
        # cell averaging in (rho, z) can leave q <= rho because that set is not
        # convex in these variables; restore it by lowering z, which keeps mass
        with np.errstate(divide="ignore"):
            zcap = np.where(rho < 1.0, np.maximum(rho, 0.0) / np.maximum(1.0 - rho, 1e-300), np.inf)
        over = z > zcap
        if np.any(over):
            projected += int(np.count_nonzero(over))
            max_proj = max(max_proj, float(np.max((z - zcap)[over] * (1.0 - rho[over]))))
            z = np.where(over, zcap, z)
        z = relax_source_step(rho, z, dt, net.epsilon, net.diagram)
        new_edges.append(EdgeGrid(rho, z, e.incoming, e.length))
        node_flux.append(float(fm[-1] if e.incoming else fm[0]))
        outer_flux.append(float(fm[0] if e.incoming else fm[-1]))
    info = StepInfo(dt, tuple(sol.rho), tuple(node_flux), tuple(outer_flux), projected, max_proj)
    return new_edges, info


def _step_lwr(net: Network, dt):
    fluxes = net.coupling.solve(junction_traces(net))
    d = net.diagram
    new_edges, node_flux, outer_flux = [], [], []
    for e, c in zip(net.edges, fluxes):
        inner = godunov_flux_lwr(e.rho[:-1], e.rho[1:], d)
        outer = float(d.eval(e.rho[0] if e.incoming else e.rho[-1]))
        if e.incoming:
            f = np.concatenate(([outer], inner, [c]))
        else:
            f = np.concatenate(([c], inner, [outer]))
        rho = e.rho - dt / e.dx * (f[1:] - f[:-1])
        new_edges.append(EdgeGrid(rho, None, e.incoming, e.length))
        node_flux.append(float(c))
        outer_flux.append(outer)
    node_rho = tuple(float(e.rho[e.node_index]) for e in net.edges)
    return new_edges, StepInfo(dt, node_rho, tuple(node_flux), tuple(outer_flux))


def step_network(net: Network, dt):
    """One forward-Euler Godunov step (plus exact source for relaxation); returns a new network."""
    if net.model == "relaxation":
        edges, info = _step_relax(net, dt)
    else:
        edges, info = _step_lwr(net, dt)
    out = replace(net, edges=edges, t=net.t + dt, last_step=info)
    for k, e in enumerate(out.edges):
        _check_edge(out, k, e)
        np.clip(e.rho, 0.0, 1.0, out=e.rho)
        if e.z is not None:
            np.maximum(e.z, 0.0, out=e.z)
    return out


def node_state_rho(net: Network):
    """Density of the junction node state on each edge for the current data."""
    if net.model == "relaxation":
        return tuple(float(r) for r in net.coupling.solve(junction_traces(net)).rho)
    return tuple(float(e.rho[e.node_index]) for e in net.edges)


def adjacent_rho(net: Network):
    return tuple(float(e.rho[e.node_index]) for e in net.edges)


@dataclass
class SimulationResult:
    network: Network
    times: np.ndarray
    node_rho: np.ndarray
    cell_rho: np.ndarray
    steps: int
    projected_cells: int
    max_projection: float
    max_junction_imbalance: float
    max_mass_defect: float


def simulate(net: Network, t_end, cfl=0.45, trace_every=10, check_conservation=False):
    """Advance ``net`` to ``t_end``; samples the junction every ``trace_every`` steps.

    ``node_rho`` holds the densities of the junction node states (for the
    LWR model the node-adjacent cells), ``cell_rho`` the node-adjacent cell
    averages.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    times, node_tr, cell_tr = [net.t], [node_state_rho(net)], [adjacent_rho(net)]
    steps, projected, max_proj = 0, 0, 0.0
    max_imb, max_defect = 0.0, 0.0
    t_stop = net.t + t_end
    while net.t < t_stop - 1e-14:
        dt = min(cfl_dt(net, cfl), t_stop - net.t)
        mass_before = net.total_mass() if check_conservation else 0.0
        net = step_network(net, dt)
        info = net.last_step
        steps += 1
        projected += info.projected_cells
        max_proj = max(max_proj, info.max_projection)
        max_imb = max(max_imb, abs(info.junction_imbalance(net.incoming)))
        if check_conservation:
            expected = info.outer_net_inflow(net.incoming) * dt
            max_defect = max(max_defect, abs(net.total_mass() - mass_before - expected))
        if steps % trace_every == 0 or net.t >= t_stop - 1e-14:
            times.append(net.t)
            node_tr.append(node_state_rho(net))
            cell_tr.append(adjacent_rho(net))
    return SimulationResult(
        net, np.array(times), np.array(node_tr), np.array(cell_tr),
        steps, projected, max_proj, max_imb, max_defect,
    )
