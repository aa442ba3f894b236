# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Subroutines that run a (method, k) sweep for the command line."""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence

from densek.core.baselines import brute_force_dkbs, brute_force_dks, greedy_dks, tpm_dks
from densek.core.ep_prox import ep_prox_solve, ep_prox_solve_bipartite
from densek.core.ep_prox_config import SolverConfig
from densek.core.graph import BipartiteGraph, Graph
from densek.utils.log import Log

MODES = ("dks", "dkbs")
METHODS = {
    "dks": ("epprox", "greedy", "tpm", "brute"),
    "dkbs": ("epprox", "brute"),
}
CSV_FIELDS = (
    "dataset",
    "n",
    "m",
    "mode",
    "k1",
    "k2",
    "method",
    "density",
    "edges_inside",
    "runtime_ms",
    "iterations",
    "converged_by",
    "distance_to_binary",
    "seed",
)


class SweepCell:  # pylint: disable=too-few-public-methods
    """One (method, k) or (method, k1, k2) cell of a sweep."""

    def __init__(self, method: str, k1: int, k2: Optional[int] = None):
        self.method = method
        self.k1 = k1  # pylint: disable=invalid-name
        self.k2 = k2  # pylint: disable=invalid-name

    def __repr__(self):
        return f"SweepCell({self.method}, k1={self.k1}, k2={self.k2})"


# pylint: disable=too-many-instance-attributes,too-few-public-methods
class CellOutcome:
    """Measurements of one cell; ``error`` holds the message of a failed run."""

    def __init__(
        self,
        cell: SweepCell,
        density=None,
        edges_inside=None,
        runtime_ms=None,
        iterations=None,
        converged_by="error",
        distance_to_binary=None,
        trace=None,
        selected_labels=None,
        error: Optional[str] = None,
    ):
        self.cell = cell
        self.density = density
        self.edges_inside = edges_inside
        self.runtime_ms = runtime_ms
        self.iterations = iterations
        self.converged_by = converged_by
        self.distance_to_binary = distance_to_binary
        self.trace = trace or []
        self.selected_labels = selected_labels or []
        self.error = error

    @property
    def failed(self) -> bool:
        """Returns True when the run raised."""
        return self.error is not None


def make_cells(
    mode: str,
    methods: Sequence[str],
    ks: Iterable[int] = (),
    k1s: Iterable[int] = (),
    k2s: Iterable[int] = (),
) -> List[SweepCell]:
    """Builds the sweep in (method, k) order; in dkbs mode every (k1, k2) pair is used."""
    if mode not in MODES:
        raise ValueError(f"Unknown mode '{mode}'.")
    if not methods:
        raise ValueError("At least one method is required.")
    for method in methods:
        if method not in METHODS[mode]:
            raise ValueError(f"Method '{method}' is not available in {mode} mode.")
    if mode == "dks":
        return [SweepCell(method, k) for method in methods for k in ks]
    return [SweepCell(method, k1, k2) for method in methods for k1 in k1s for k2 in k2s]


def check_cells(graph, cells: Iterable[SweepCell]):
    """Rejects cardinalities that do not fit the loaded graph."""
    for cell in cells:
        if isinstance(graph, BipartiteGraph):
            if not (1 <= cell.k1 < graph.n1 and 1 <= cell.k2 < graph.n2):
                raise ValueError(
                    f"(k1, k2)=({cell.k1}, {cell.k2}) must satisfy "
                    f"1 <= k1 < n1={graph.n1} and 1 <= k2 < n2={graph.n2}."
                )
        elif not 1 <= cell.k1 < graph.n:
            raise ValueError(f"k={cell.k1} must satisfy 1 <= k < n={graph.n}.")


def _solve(graph, cell: SweepCell, config: SolverConfig):
    if isinstance(graph, BipartiteGraph):
        if cell.method == "epprox":
            return ep_prox_solve_bipartite(graph, cell.k1, cell.k2, config)
        return brute_force_dkbs(graph, cell.k1, cell.k2)
    if cell.method == "epprox":
        return ep_prox_solve(graph, cell.k1, config)
    if cell.method == "greedy":
        return greedy_dks(graph, cell.k1)
    if cell.method == "tpm":
        return tpm_dks(graph, cell.k1)
    return brute_force_dks(graph, cell.k1)


def run_cell(graph, cell: SweepCell, config: SolverConfig) -> CellOutcome:
    """Runs one cell; solver failures are captured in the outcome instead of raised."""
    Log.log(f"Running {cell}")
    start = time.perf_counter()
    try:
        result = _solve(graph, cell, config)
    except (ValueError, RuntimeError) as error:
        Log.log(f"{cell} failed: {error}")
        return CellOutcome(cell, error=str(error))
    runtime_ms = (time.perf_counter() - start) * 1000.0

    if cell.method == "epprox":
        return CellOutcome(
            cell,
            density=result.density,
            edges_inside=result.edges_inside,
            runtime_ms=runtime_ms,
            iterations=result.iterations,
            converged_by=result.converged_by,
            distance_to_binary=result.distance_to_binary,
            trace=result.trace,
            selected_labels=result.selected_labels,
        )
    return CellOutcome(
        cell,
        density=result.density,
        edges_inside=result.edges_inside,
        runtime_ms=runtime_ms,
        iterations=result.iterations,
        converged_by=result.stopped_by,
        distance_to_binary=0.0,
        selected_labels=_baseline_labels(graph, result.selection),
    )


def _baseline_labels(graph, selection) -> list:
    if isinstance(graph, Graph):
        return graph.labels[selection > 0].tolist()
    left, right = selection[: graph.n1], selection[graph.n1 :]
    return [("left", label) for label in graph.left_labels[left > 0]] + [
        ("right", label) for label in graph.right_labels[right > 0]
    ]


def run_sweep(
    graph, cells: Sequence[SweepCell], config: SolverConfig, jobs: int = 1
) -> List[CellOutcome]:
    """Runs every cell, at most ``jobs`` at a time; outcomes follow the order of ``cells``."""
    if jobs < 1:
        raise ValueError("jobs must be at least 1.")
    if jobs == 1:
        return [run_cell(graph, cell, config) for cell in cells]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda cell: run_cell(graph, cell, config), cells))


def _blank(value, fmt=str) -> str:
    return "" if value is None else fmt(value)


def _float_text(value) -> str:
    return repr(float(value))


def csv_row(
    outcome: CellOutcome, dataset: str, graph, mode: str, seed: int
) -> List[object]:
    """Formats one outcome in :data:`CSV_FIELDS` order."""
    cell = outcome.cell
    return [
        dataset,
        graph.n,
        graph.m,
        mode,
        cell.k1,
        _blank(cell.k2),
        cell.method,
        _blank(outcome.density, _float_text),
        _blank(outcome.edges_inside),
        _blank(outcome.runtime_ms, "{:.3f}".format),
        _blank(outcome.iterations),
        outcome.converged_by,
        _blank(outcome.distance_to_binary, _float_text),
        seed,
    ]
