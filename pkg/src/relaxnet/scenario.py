"""Scenario files, simulation runs and relaxation-versus-LWR comparison.

A scenario file is flat ``key = value`` text; per-edge settings may sit in
``[edge1]`` .. ``[edge3]`` sections::

    name = fair_merge_free
    model = both
    topology = merge
    coupling = merge_flux_ratio

    [edge1]
    rho_init = 0.1
    [edge2]
    rho_init = 0.15
    [edge3]
    rho_init = 0.2
"""

import configparser
import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .couplings import lwr_counterpart, parse_coupling
from .diagram import DIAGRAMS, get_diagram
from .exceptions import ScenarioError
from .fv import make_network, simulate

MODELS = ("relaxation", "lwr", "both")
OUTPUTS = ("profile", "node_trace", "comparison")
_HEADER = "scenario"


@dataclass
class Scenario:
    name: str = "scenario"
    model: str = "both"
    topology: str = "merge"
    coupling: str = "merge_flux_ratio"
    lwr_coupling: Optional[str] = None
    rho_init: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    epsilon: float = 1e-3
    n_cells: int = 1000
    cfl: float = 0.45
    t_end: float = 1.0
    diagram: str = "quadratic"
    outputs: Tuple[str, ...] = OUTPUTS
    layer_window: float = 0.05
    trace_every: int = 10

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(fld, msg):
            raise ScenarioError(f"invalid field {fld!r}: {msg}")

        if not self.name or any(c in self.name for c in "/\\"):
            bad("name", f"must be a plain file stem, got {self.name!r}")
        if self.model not in MODELS:
            bad("model", f"must be one of {MODELS}, got {self.model!r}")
        if self.topology not in ("merge", "diverge"):
            bad("topology", f"must be 'merge' or 'diverge', got {self.topology!r}")
        if self.diagram not in DIAGRAMS:
            bad("diagram", f"unknown diagram {self.diagram!r}")
        if len(self.rho_init) != 3:
            bad("rho_init", f"needs one density per edge, got {len(self.rho_init)}")
        for i, r in enumerate(self.rho_init, start=1):
            if not 0.0 <= r <= 1.0:
                bad("rho_init", f"edge {i} density {r!r} outside [0, 1]")
        if not self.epsilon > 0.0:
            bad("epsilon", f"must be positive, got {self.epsilon!r}")
        if self.n_cells < 2:
            bad("n_cells", f"must be at least 2, got {self.n_cells!r}")
        if not 0.0 < self.cfl <= 1.0:
            bad("cfl", f"must lie in (0, 1], got {self.cfl!r}")
        if not self.t_end > 0.0:
            bad("t_end", f"must be positive, got {self.t_end!r}")
        if not 0.0 <= self.layer_window <= 0.2:
            bad("layer_window", f"must lie in [0, 0.2], got {self.layer_window!r}")
        if self.trace_every < 1:
            bad("trace_every", f"must be at least 1, got {self.trace_every!r}")
        for o in self.outputs:
            if o not in OUTPUTS:
                bad("outputs", f"unknown output {o!r}; known: {OUTPUTS}")
        try:
            self.relax_coupling()
            self.lwr_limit_coupling()
        except ValueError as exc:
            bad("lwr_coupling" if "counterpart" in str(exc) else "coupling", str(exc))

    def relax_coupling(self):
        c = parse_coupling(self.coupling)
        if c.topology != self.topology:
            raise ValueError(f"coupling {c.name!r} does not fit a {self.topology} junction")
        if self.model != "lwr" and c.model != "relaxation":
            raise ValueError(f"model {self.model!r} needs a relaxation coupling, got {c.name!r}")
        return c

    def lwr_limit_coupling(self):
        if self.lwr_coupling is not None:
            c = parse_coupling(self.lwr_coupling)
            if c.model != "lwr" or c.topology != self.topology:
                raise ValueError(f"lwr_coupling {self.lwr_coupling!r} is not an LWR {self.topology} condition")
            return c
        if self.model == "relaxation":
            return None
        return lwr_counterpart(parse_coupling(self.coupling))


# -- loading ------------------------------------------------------------------------

_FLOATS = ("epsilon", "cfl", "t_end", "layer_window")
_INTS = ("n_cells", "trace_every")
_STRINGS = ("name", "model", "topology", "coupling", "lwr_coupling", "diagram")


def _unquote(v):
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "'\"":
        return v[1:-1]
    return v


def _parse_rho_list(text):
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


def load_scenario(path):
    """Read and validate a scenario file; unset fields take their defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(f"[{_HEADER}]\n" + text, source=str(path))
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ScenarioError(f"{path}:{lineno - 1}: cannot parse line {line.strip()!r}") from exc
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        where = f"{path}:{lineno - 1}" if lineno else str(path)
        raise ScenarioError(f"{where}: {exc.message}") from exc

    kw: Dict[str, object] = {"name": path.stem}
    top = cp[_HEADER]
    known = set(_FLOATS + _INTS + _STRINGS + ("rho_init", "outputs"))
    for key, raw in top.items():
        if key not in known:
            raise ScenarioError(f"invalid field {key!r}: unknown setting")
        val = _unquote(raw)
        try:
            if key in _FLOATS:
                kw[key] = float(val)
            elif key in _INTS:
                kw[key] = int(val)
            elif key == "rho_init":
                kw[key] = _parse_rho_list(val)
            elif key == "outputs":
                kw[key] = tuple(o.strip() for o in val.split(",") if o.strip())
            else:
                kw[key] = val
        except ValueError:
            raise ScenarioError(f"invalid field {key!r}: cannot read value {val!r}") from None

    edge_sections = [s for s in cp.sections() if s != _HEADER]
    if edge_sections:
        if "rho_init" in kw:
            raise ScenarioError("invalid field 'rho_init': given both at top level and per edge")
        rho = []
        for i in (1, 2, 3):
            sec = f"edge{i}"
            if sec not in cp:
                raise ScenarioError(f"invalid field 'rho_init': missing section [{sec}]")
            try:
                rho.append(float(_unquote(cp[sec]["rho_init"])))
            except KeyError:
                raise ScenarioError(f"invalid field 'rho_init': missing in section [{sec}]") from None
            except ValueError:
                raise ScenarioError(f"invalid field 'rho_init': cannot read value in [{sec}]") from None
        for s in edge_sections:
            if s not in ("edge1", "edge2", "edge3"):
                raise ScenarioError(f"unknown section [{s}]")
        kw["rho_init"] = tuple(rho)
    if "rho_init" not in kw:
        raise ScenarioError("invalid field 'rho_init': required")
    if "topology" not in kw:
        raise ScenarioError("invalid field 'topology': required")
    if "coupling" not in kw:
        kw["coupling"] = "merge_flux_ratio" if kw["topology"] == "merge" else "diverge_adaptive"
    return Scenario(**kw)


# -- running ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Outcome of :func:`run`.

    ``node_trace`` has columns t, then the junction density per edge;
    ``cell_trace`` the node-adjacent cell averages at the same times.
    ``l1_interior`` is None unless both models ran.
    """

    scenario: str
    layer_window: float
    l1_interior: Optional[float]
    l1_per_edge: Optional[Tuple[float, float, float]]
    node_trace: np.ndarray
    cell_trace: np.ndarray
    final_node_rho: Tuple[float, float, float]
    final_cell_rho: Tuple[float, float, float]
    diagnostics: Dict[str, float] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)


def _fmt(v):
    return format(float(v), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def interior_mask(x, incoming, window):
    """Cells outside the layer window at the junction end of an edge."""
    return x <= 1.0 - window if incoming else x >= window


def l1_gap(net_a, net_b, window):
    """Per-edge L1 distance of the densities outside the junction layer windows."""
    out = []
    for ea, eb in zip(net_a.edges, net_b.edges):
        if ea.n_cells != eb.n_cells:
            raise ValueError("networks must share the grid")
        m = interior_mask(ea.x, ea.incoming, window)
        out.append(float(np.sum(np.abs(ea.rho - eb.rho)[m]) * ea.dx))
    return tuple(out)


def run_model(s: Scenario, model, epsilon=None):
    """Simulate one model of the scenario; returns the simulation result."""
    d = get_diagram(s.diagram)
    coupling = s.relax_coupling() if model == "relaxation" else s.lwr_limit_coupling()
    eps = s.epsilon if epsilon is None else epsilon
    net = make_network(s.rho_init, s.topology, coupling, d, eps if model == "relaxation" else None, s.n_cells)
    return simulate(net, s.t_end, cfl=s.cfl, trace_every=s.trace_every, check_conservation=True)


def run(s: Scenario, out_dir=None):
    """Run the scenario, write the requested CSVs into ``out_dir`` and compare the models."""
    models = ("relaxation", "lwr") if s.model == "both" else (s.model,)
    results = {m: run_model(s, m) for m in models}
    main = results[models[0]]

    l1 = None
    l1_total = None
    if s.model == "both":
        l1 = l1_gap(results["relaxation"].network, results["lwr"].network, s.layer_window)
        l1_total = max(l1)

    diag = {"t_end": main.network.t}
    for m, r in results.items():
        diag[f"{m}_steps"] = r.steps
        diag[f"{m}_max_junction_imbalance"] = r.max_junction_imbalance
        diag[f"{m}_max_mass_defect"] = r.max_mass_defect
    if "relaxation" in results:
        diag["projected_cells"] = results["relaxation"].projected_cells
        diag["max_projection"] = results["relaxation"].max_projection

    node_trace = np.column_stack([main.times, main.node_rho])
    cell_trace = np.column_stack([main.times, main.cell_rho])
    report = ComparisonReport(
        s.name, s.layer_window, l1_total, l1, node_trace, cell_trace,
        tuple(float(v) for v in main.node_rho[-1]), tuple(float(v) for v in main.cell_rho[-1]), diag,
    )
    if out_dir is not None:
        report.files = _write_outputs(s, results, report, Path(out_dir))
    return report


def _write_outputs(s, results, report, out):
    out.mkdir(parents=True, exist_ok=True)
    files = []
    d = get_diagram(s.diagram)
    models = list(results)
    main = results[models[0]].network
    if "profile" in s.outputs:
        for i, e in enumerate(main.edges, start=1):
            header = ["x", "rho", "q"]
            q = e.q if e.z is not None else d.eval(e.rho)
            cols = [e.x, e.rho, q]
            if s.model == "both":
                el = results["lwr"].network.edges[i - 1]
                header += ["rho_lwr", "q_lwr"]
                cols += [el.rho, d.eval(el.rho)]
            p = out / f"{s.name}_edge{i}_profile.csv"
            _write_csv(p, header, zip(*cols))
            files.append(p)
    if "node_trace" in s.outputs:
        p = out / f"{s.name}_node_trace.csv"
        _write_trace(p, report.node_trace, report.cell_trace)
        files.append(p)
    if "comparison" in s.outputs:
        p = out / f"{s.name}_report.csv"
        rows = []
        if report.l1_interior is not None:
            rows.append(("l1_interior", report.l1_interior))
            rows += [(f"l1_edge{i}", v) for i, v in enumerate(report.l1_per_edge, start=1)]
        rows.append(("layer_window", report.layer_window))
        rows += [(f"node_rho_edge{i}", v) for i, v in enumerate(report.final_node_rho, start=1)]
        rows += [(f"cell_rho_edge{i}", v) for i, v in enumerate(report.final_cell_rho, start=1)]
        rows += sorted(report.diagnostics.items())
        _write_csv(p, ["metric", "value"], rows)
        files.append(p)
    return files


def _write_trace(path, node_trace, cell_trace):
    header = ["t", "rho_edge1", "rho_edge2", "rho_edge3", "cell_edge1", "cell_edge2", "cell_edge3"]
    _write_csv(path, header, np.column_stack([node_trace, cell_trace[:, 1:]]))


# -- epsilon sweep ------------------------------------------------------------------------

@dataclass
class SweepEntry:
    epsilon: float
    node_trace: np.ndarray
    cell_trace: np.ndarray
    steps: int

    @property
    def terminal(self):
        return tuple(float(v) for v in self.node_trace[-1, 1:])


def _sweep_worker(args):
    s, eps = args
    r = run_model(s, "relaxation", epsilon=eps)
    return SweepEntry(eps, np.column_stack([r.times, r.node_rho]), np.column_stack([r.times, r.cell_rho]), r.steps)


def epsilon_sweep(s: Scenario, eps_list, out_dir=None, jobs=None):
    """Run the relaxation model for every ``epsilon``; simulations run in separate processes."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ScenarioError("invalid field 'epsilon': the sweep list is empty")
    for e in eps_list:
        if not e > 0.0:
            raise ScenarioError(f"invalid field 'epsilon': must be positive, got {e!r}")
    if s.model == "lwr":
        raise ScenarioError("invalid field 'model': a sweep needs the relaxation model")
    tasks = [(s, e) for e in eps_list]
    jobs = min(len(tasks), jobs or os.cpu_count() or 1)
    if jobs <= 1:
        entries = [_sweep_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            entries = list(ex.map(_sweep_worker, tasks))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for en in entries:
            _write_trace(out / f"{s.name}_eps{en.epsilon:g}_node_trace.csv", en.node_trace, en.cell_trace)
        rows = [(en.epsilon, *en.terminal, *en.cell_trace[-1, 1:], en.steps) for en in entries]
        header = ["epsilon", "rho_edge1", "rho_edge2", "rho_edge3", "cell_edge1", "cell_edge2", "cell_edge3", "steps"]
        _write_csv(out / f"{s.name}_sweep.csv", header, rows)
    return entries
