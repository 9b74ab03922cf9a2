import csv
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from relaxnet.exceptions import ScenarioError
from relaxnet.scenario import Scenario, epsilon_sweep, l1_gap, load_scenario, run

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
FAMILIES = sorted(p for p in SCENARIOS.glob("*.ini") if p.stem != "fair_merge_node")


def _write(tmp_path, text, name="case.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoad:
    def test_minimal_file_gets_defaults(self, tmp_path):
        s = load_scenario(_write(tmp_path, "topology = merge\nrho_init = 0.1, 0.2, 0.3\n"))
        assert s.rho_init == (0.1, 0.2, 0.3)
        assert (s.n_cells, s.epsilon, s.t_end, s.cfl) == (1000, 1e-3, 1.0, 0.45)
        assert s.coupling == "merge_flux_ratio" and s.model == "both"
        assert s.layer_window == 0.05 and s.name == "case"

    def test_density_out_of_range(self, tmp_path):
        with pytest.raises(ScenarioError, match="rho_init"):
            load_scenario(_write(tmp_path, "topology = merge\nrho_init = 1.5 0.2 0.3\n"))

    def test_shipped_scenario_file(self):
        s = load_scenario(SCENARIOS / "fair_merge_free.ini")
        assert s.rho_init == (0.1, 0.15, 0.2)
        assert (s.topology, s.coupling, s.model) == ("merge", "merge_flux_ratio", "both")
        assert (s.epsilon, s.n_cells, s.t_end) == (1e-3, 1000, 1.0)

    def test_parse_error_has_line_number(self, tmp_path):
        p = _write(tmp_path, "topology = merge\n# comment\nthis line is broken\n")
        with pytest.raises(ScenarioError, match=r":3:"):
            load_scenario(p)

    @pytest.mark.parametrize(
        "text, field",
        [("topology = merge\nrho_init = 0.1 0.1 0.1\nepsilon = -1\n", "epsilon"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\nn_cells = 1\n", "n_cells"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\nn_cells = many\n", "n_cells"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\nlayer_window = 0.3\n", "layer_window"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\ncolour = red\n", "colour"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\ncoupling = diverge_adaptive\n", "coupling"),
         ("topology = merge\nrho_init = 0.1 0.1 0.1\ncoupling = merge_priority(0.3)\n", "lwr_coupling"),
         ("topology = roundabout\nrho_init = 0.1 0.1 0.1\n", "topology"),
         ("topology = merge\nrho_init = 0.1 0.1\n", "rho_init"),
         ("topology = merge\n", "rho_init"),
         ("topology = merge\n[edge1]\nrho_init = 0.1\n[edge2]\nrho_init = 0.1\n", "rho_init"),
         ("topology = merge\noutputs = movie\nrho_init = 0.1 0.1 0.1\n", "outputs")],
    )
    def test_validation_names_field(self, tmp_path, text, field):
        with pytest.raises(ScenarioError, match=field):
            load_scenario(_write(tmp_path, text))

    def test_quoted_values_and_explicit_lwr_coupling(self, tmp_path):
        text = 'topology = merge\ncoupling = "merge_priority(0.3)"\nlwr_coupling = lwr_fair\nrho_init = 0.1 0.2 0.3\n'
        s = load_scenario(_write(tmp_path, text))
        assert s.coupling == "merge_priority(0.3)"
        assert s.lwr_limit_coupling().name == "lwr_fair"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / "nope.ini")


class TestRun:
    def test_steady_state_has_no_gap(self):
        s = Scenario(topology="merge", rho_init=(0.35, 0.0, 0.35), n_cells=100, t_end=0.3)
        assert run(s).l1_interior <= 1e-12

    def test_outputs_and_columns(self, tmp_path):
        s = Scenario(name="small", rho_init=(0.1, 0.15, 0.2), n_cells=50, t_end=0.2)
        rep = run(s, tmp_path)
        names = sorted(p.name for p in rep.files)
        assert names == ["small_edge1_profile.csv", "small_edge2_profile.csv", "small_edge3_profile.csv",
                         "small_node_trace.csv", "small_report.csv"]
        with open(tmp_path / "small_edge1_profile.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "rho", "q", "rho_lwr", "q_lwr"] and len(rows) == 51
        with open(tmp_path / "small_node_trace.csv") as fh:
            assert next(csv.reader(fh))[:4] == ["t", "rho_edge1", "rho_edge2", "rho_edge3"]
        with open(tmp_path / "small_report.csv") as fh:
            metrics = dict(list(csv.reader(fh))[1:])
        assert float(metrics["l1_interior"]) == pytest.approx(rep.l1_interior, rel=1e-15)

    def test_single_model_outputs(self, tmp_path):
        s = Scenario(name="lw", model="lwr", rho_init=(0.1, 0.15, 0.2), n_cells=20, t_end=0.1,
                     outputs=("profile",))
        rep = run(s, tmp_path)
        assert rep.l1_interior is None and len(rep.files) == 3

    def test_deterministic_bytes(self, tmp_path):
        s = Scenario(name="det", topology="diverge", coupling="diverge_adaptive", rho_init=(0.7, 0.2, 0.1),
                     n_cells=80, t_end=0.3)
        run(s, tmp_path / "a")
        run(s, tmp_path / "b")
        for f in (tmp_path / "a").iterdir():
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_priority_jam_blocks_lane_two(self):
        rep = run(load_scenario(SCENARIOS / "priority_merge_jam.ini"))
        assert rep.final_node_rho[1] == pytest.approx(1.0, abs=0.01)

    def test_window_excludes_node_cells(self):
        s = Scenario(rho_init=(0.1, 0.15, 0.2), n_cells=40, t_end=0.1)
        from relaxnet.scenario import run_model
        a, b = run_model(s, "relaxation").network, run_model(s, "lwr").network
        assert sum(l1_gap(a, b, 0.2)) <= sum(l1_gap(a, b, 0.0))


class TestSweep:
    def test_single_epsilon_equals_run_trace(self):
        s = Scenario(rho_init=(0.2, 0.3, 0.6), n_cells=60, t_end=0.2, model="relaxation")
        (entry,) = epsilon_sweep(s, [s.epsilon], jobs=1)
        np.testing.assert_array_equal(entry.node_trace, run(s).node_trace)

    def test_parallel_matches_serial(self, tmp_path):
        s = Scenario(name="sw", rho_init=(0.2, 0.3, 0.6), n_cells=40, t_end=0.1)
        a = epsilon_sweep(s, [1e-1, 1e-3], tmp_path, jobs=2)
        b = epsilon_sweep(s, [1e-1, 1e-3], jobs=1)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.node_trace, y.node_trace)
        assert (tmp_path / "sw_sweep.csv").exists()
        assert (tmp_path / "sw_eps0.001_node_trace.csv").exists()

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ScenarioError):
            epsilon_sweep(Scenario(rho_init=(0.1, 0.1, 0.1)), [1e-3, 0.0])

    @pytest.mark.slow
    def test_terminal_values_approach_matched_node(self):
        from relaxnet.layer import match_fair_merge
        s = load_scenario(SCENARIOS / "fair_merge_node.ini")
        target = match_fair_merge(*s.rho_init).rho0
        entries = epsilon_sweep(s, [1e-1, 1e-2, 1e-3, 1e-4])
        # ingoing node-adjacent cells: on these edges the layer is trivial
        gaps = [abs(e.cell_trace[-1, 1] - target) for e in entries]
        assert all(a >= b for a, b in zip(gaps, gaps[1:])), gaps
        assert gaps[-1] < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("path", FAMILIES, ids=lambda p: p.stem)
def test_gap_shrinks_with_epsilon(path):
    s = load_scenario(path)
    coarse = run(replace(s, epsilon=1e-2)).l1_interior
    fine = run(replace(s, epsilon=1e-3)).l1_interior
    assert fine <= 1.1 * coarse
