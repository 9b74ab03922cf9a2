"""Command line entry point ``relaxnet``."""

import argparse
import csv
import sys

from .exceptions import CouplingError, DomainError, ScenarioError, SimulationError
from .layer import MATCH_COLUMNS, matching_table
from .scenario import epsilon_sweep, load_scenario, run
from .selftest import run_all


def _eps_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read epsilon list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("epsilon list is empty")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="relaxnet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario file and write CSV outputs")
    s.add_argument("scenario")
    s.add_argument("--out", default=".", help="output directory (default: current)")

    w = sub.add_parser("sweep", help="run the relaxation model for several epsilon values")
    w.add_argument("scenario")
    w.add_argument("--eps", type=_eps_list, default=[1e-1, 1e-2, 1e-3, 1e-4])
    w.add_argument("--out", default=".")
    w.add_argument("--jobs", type=int, default=None, help="worker processes (default: one per epsilon)")

    m = sub.add_parser("match", help="print the fair-merge matching table as CSV")
    m.add_argument("--grid", type=int, default=21, help="points per axis")
    m.add_argument("--out", default=None, help="write to a file instead of stdout")

    t = sub.add_parser("selftest", help="run the randomized invariant suites")
    t.add_argument("--scenarios", type=int, default=100)
    t.add_argument("--inputs", type=int, default=10_000)
    t.add_argument("--seed", type=int, default=0)
    return p


def _cmd_simulate(args):
    s = load_scenario(args.scenario)
    rep = run(s, args.out)
    if rep.l1_interior is not None:
        print(f"l1_interior = {rep.l1_interior:.6g} (layer window {rep.layer_window:g})")
    print("node density  " + " ".join(f"{v:.6f}" for v in rep.final_node_rho))
    print("adjacent cell " + " ".join(f"{v:.6f}" for v in rep.final_cell_rho))
    for f in rep.files:
        print(f"wrote {f}")
    return 0


def _cmd_sweep(args):
    s = load_scenario(args.scenario)
    entries = epsilon_sweep(s, args.eps, args.out, args.jobs)
    for e in entries:
        print(f"epsilon={e.epsilon:g} node density " + " ".join(f"{v:.6f}" for v in e.terminal))
    return 0


def _cmd_match(args):
    if args.grid < 2:
        print("error: --grid needs at least 2 points", file=sys.stderr)
        return 2
    rows = matching_table(args.grid)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATCH_COLUMNS)
        for r in rows:
            w.writerow([format(v, ".17g") for v in r[:7]] + [r[7]])
    finally:
        if args.out:
            fh.close()
    return 0


def _cmd_selftest(args):
    results = run_all(n_scenarios=args.scenarios, n_inputs=args.inputs, seed=args.seed)
    return 0 if all(r.passed for r in results) else 1


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "match": _cmd_match, "selftest": _cmd_selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, CouplingError, DomainError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
