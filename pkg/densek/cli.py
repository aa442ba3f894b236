# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Command line front end: loads a graph, sweeps (method, k) cells and writes CSV rows.

Exit codes: 0 on success, 1 when at least one cell failed (its row is marked
``error``), 2 on unusable input (I/O, parse or argument errors; no CSV is written).
"""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from densek.core.ep_prox_config import EXTRAPOLATION_MODES, SolverConfig
from densek.core.ep_prox_result import trace_to_jsonl
from densek.core.graph import (
    COMMENT_PREFIXES,
    load_edge_list,
    preprocess_bipartite,
    preprocess_unipartite,
)
from densek.utils.log import Log
from densek.utils.sweep_subroutines import (
    CSV_FIELDS,
    METHODS,
    check_cells,
    csv_row,
    make_cells,
    run_sweep,
)

# --schedule name -> SolverConfig factory, per mode
SCHEDULES = {
    "published": {"dks": SolverConfig.for_dks, "dkbs": SolverConfig.for_dkbs},
    "gentle": {"dks": SolverConfig.gentle, "dkbs": SolverConfig.gentle},
}

# flag dest -> SolverConfig field
CONFIG_FLAGS = {
    "lambda0": "lambda0",
    "lambda_growth": "lambda_growth",
    "max_iter": "max_iter",
    "stop_tol": "stop_sq_tol",
    "c1": "c1",
    "c2": "c2",
    "extrapolation": "extrapolation_mode",
}


def int_list(text: str) -> List[int]:
    """Parses a strictly increasing comma-separated list of positive integers."""
    try:
        values = [int(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(  # pylint: disable=raise-missing-from
            f"expected comma-separated integers, got '{text}'"
        )
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    if any(value < 1 for value in values):
        raise argparse.ArgumentTypeError(f"values must be >= 1, got '{text}'")
    if any(left >= right for left, right in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(
            f"values must be strictly increasing: '{text}'"
        )
    return values


def method_list(text: str) -> List[str]:
    """Parses a comma-separated method list."""
    methods = [token.strip() for token in text.split(",") if token.strip()]
    if not methods:
        raise argparse.ArgumentTypeError("at least one method is required")
    return methods


def _add_common_arguments(parser: argparse.ArgumentParser, mode: str):
    parser.add_argument("--input", required=True, help="Edge-list file.")
    parser.add_argument(
        "--format",
        choices=sorted(COMMENT_PREFIXES),
        default="snap",
        help="Edge-list dialect (default: snap).",
    )
    parser.add_argument(
        "--methods",
        type=method_list,
        default=["epprox"],
        help=f"Comma list from {','.join(METHODS[mode])} (default: epprox).",
    )
    parser.add_argument(
        "--schedule",
        choices=sorted(SCHEDULES),
        default="published",
        help="Base schedule; the flags below override it (default: published).",
    )
    parser.add_argument("--lambda0", type=float, help="Initial penalty weight.")
    parser.add_argument(
        "--lambda-growth",
        type=float,
        dest="lambda_growth",
        help="Penalty growth factor.",
    )
    parser.add_argument("--max-iter", type=int, dest="max_iter", help="Iteration cap.")
    parser.add_argument(
        "--stop-tol", type=float, dest="stop_tol", help="Squared-step stop tolerance."
    )
    parser.add_argument("--c1", type=float, help="Step-size constant c1 > 1.")
    parser.add_argument("--c2", type=float, help="Step-size constant c2 >= c1.")
    parser.add_argument("--extrapolation", choices=EXTRAPOLATION_MODES)
    parser.add_argument("--trace-out", dest="trace_out", help="JSON-lines trace path.")
    parser.add_argument(
        "--selection-out", dest="selection_out", help="JSON-lines selected labels path."
    )
    parser.add_argument("--out", help="CSV path (default: stdout).")
    parser.add_argument("--jobs", type=int, default=1, help="Cells run in parallel.")
    parser.add_argument("--seed", type=int, default=0, help="Power-iteration seed.")
    parser.add_argument("--verbose", action="store_true", help="Log to stderr.")


def build_parser() -> argparse.ArgumentParser:
    """Builds the ``densek`` argument parser."""
    parser = argparse.ArgumentParser(
        prog="densek", description="Dense k-subgraph discovery with EP-Prox."
    )
    subparsers = parser.add_subparsers(dest="mode", required=True)

    dks = subparsers.add_parser("dks", help="Densest k-subgraph sweep.")
    dks.add_argument("--k", type=int_list, required=True, help="Comma list of k.")
    _add_common_arguments(dks, "dks")

    dkbs = subparsers.add_parser("dkbs", help="Densest (k1, k2) bipartite sweep.")
    dkbs.add_argument("--k1", type=int_list, required=True, help="Comma list of k1.")
    dkbs.add_argument("--k2", type=int_list, required=True, help="Comma list of k2.")
    _add_common_arguments(dkbs, "dkbs")
    return parser


# pylint: disable=too-many-instance-attributes,too-few-public-methods
class RunPlan:
    """Everything one invocation needs, resolved from the command line."""

    def __init__(self, args: argparse.Namespace):
        self.input = Path(args.input)
        self.fmt = args.format
        self.mode = args.mode
        self.methods = args.methods
        self.ks = getattr(args, "k", None) or []
        self.k1s = getattr(args, "k1", None) or []
        self.k2s = getattr(args, "k2", None) or []
        self.out = args.out
        self.trace_out = args.trace_out
        self.selection_out = args.selection_out
        self.jobs = args.jobs
        self.seed = args.seed
        self.verbose = args.verbose
        overrides = {
            field: getattr(args, flag)
            for flag, field in CONFIG_FLAGS.items()
            if getattr(args, flag) is not None
        }
        factory = SCHEDULES[args.schedule][self.mode]
        self.config = factory(seed=self.seed, **overrides)
        self.cells = make_cells(self.mode, self.methods, self.ks, self.k1s, self.k2s)
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1.")

    @property
    def dataset(self) -> str:
        """Returns the dataset name written in the CSV."""
        return self.input.name


def _error(message: str) -> int:
    print(f"densek: error: {message}", file=sys.stderr)
    return 2


def _write_csv(stream, plan: RunPlan, graph, outcomes):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for outcome in outcomes:
        writer.writerow(csv_row(outcome, plan.dataset, graph, plan.mode, plan.seed))


def _cell_context(plan: RunPlan, cell) -> dict:
    return {
        "dataset": plan.dataset,
        "mode": plan.mode,
        "method": cell.method,
        "k1": cell.k1,
        "k2": cell.k2,
    }


def run(plan: RunPlan) -> int:
    """Loads the graph, runs every cell and writes the outputs; returns the exit code."""
    if plan.verbose:
        Log.VERBOSE = True
    try:
        with plan.input.open("rb") as stream:
            edge_list = load_edge_list(stream, plan.fmt)
        if plan.mode == "dks":
            graph = preprocess_unipartite(edge_list)
        else:
            graph = preprocess_bipartite(edge_list)
        check_cells(graph, plan.cells)
    except OSError as error:
        return _error(str(error))
    except ValueError as error:
        return _error(f"{plan.input}: {error}")

    outcomes = run_sweep(graph, plan.cells, plan.config, plan.jobs)

    try:
        if plan.out:
            with open(plan.out, "w", newline="", encoding="utf-8") as stream:
                _write_csv(stream, plan, graph, outcomes)
        else:
            _write_csv(sys.stdout, plan, graph, outcomes)
        if plan.trace_out:
            with open(plan.trace_out, "w", encoding="utf-8") as stream:
                for outcome in outcomes:
                    context = _cell_context(plan, outcome.cell)
                    trace_to_jsonl(outcome.trace, stream, **context)
        if plan.selection_out:
            with open(plan.selection_out, "w", encoding="utf-8") as stream:
                for outcome in outcomes:
                    line = {
                        **_cell_context(plan, outcome.cell),
                        "labels": outcome.selected_labels,
                    }
                    stream.write(json.dumps(line, default=str) + "\n")
    except OSError as error:
        return _error(str(error))

    failed = [outcome for outcome in outcomes if outcome.failed]
    for outcome in failed:
        print(f"densek: {outcome.cell} failed: {outcome.error}", file=sys.stderr)
    return 1 if failed else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``densek`` console script."""
    args = build_parser().parse_args(argv)
    try:
        plan = RunPlan(args)
    except ValueError as error:
        return _error(str(error))
    return run(plan)


if __name__ == "__main__":
    sys.exit(main())
