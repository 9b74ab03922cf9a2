"""Relaxation and LWR traffic models on a single merge or diverge junction."""

from .couplings import Coupling, lwr_counterpart, parse_coupling
from .diagram import FundamentalDiagram, QuadraticDiagram, get_diagram
from .exceptions import CouplingError, DomainError, ScenarioError, SimulationError
from .fv import make_network, simulate, step_network
from .junction_lwr import Capacities, demand, merge_fair, supply
from .junction_relax import DivergeInputs, MergeInputs, NodeSolution
from .layer import (
    LayerFixedPoints,
    MatchResult,
    half_riemann_admissible,
    integrate_layer,
    layer_fixed_points,
    match_fair_merge,
    relax_node_state_fair,
)
from .scenario import Scenario, epsilon_sweep, load_scenario, run
from .state import ConsState, InvariantPair, PrimState

__version__ = "0.1.0"
