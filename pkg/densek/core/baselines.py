# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Reference solvers: greedy peeling, truncated power method and brute-force oracles."""

import heapq
import itertools
import time
from typing import Optional

import numpy as np
from scipy.special import comb

from densek.core.ep_prox_result import AuxiliaryResults
from densek.core.graph import BipartiteGraph, Graph, spmv
from densek.core.metrics import bipartite_density, edge_density
from densek.core.penalty import top_k_indices
from densek.utils.log import Log

ORACLE_LIMIT = 10**7
TPM_MAX_ITER = 200


class OracleTooLargeError(ValueError):
    """Raised when exhaustive enumeration would exceed the subset budget."""


class BaselineResult(AuxiliaryResults):
    """Baseline result."""

    def __init__(
        self,
        selection: np.ndarray,
        density: float,
        edges_inside: int,
        wall_time: float = 0.0,
        iterations: int = 0,
        stopped_by: str = "",
    ) -> None:
        """Results of a reference solver.

        Args:
            selection: binary selection vector (stacked (x, y) for bipartite oracles).
            density: edge density of the selection, NaN when k = 1.
            edges_inside: edges induced by the selection.
            wall_time: seconds spent.
            iterations: TPM iterations, peeled vertices for greedy, subsets for brute force.
            stopped_by: termination reason.
        """
        self.selection = selection
        self.density = density
        self.edges_inside = edges_inside
        self.wall_time = wall_time
        self.iterations = iterations
        self.stopped_by = stopped_by

    @property
    def support(self) -> np.ndarray:
        """Returns the indices of the selected coordinates."""
        return np.flatnonzero(self.selection)


def _check_k(graph: Graph, k: int):
    if not 1 <= k <= graph.n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n={graph.n}.")


def _unipartite_result(
    graph: Graph, support, k: int, start: float, iterations: int, stopped_by: str
):
    selection = np.zeros(graph.n)
    selection[np.asarray(support, dtype=np.int64)] = 1.0
    if k >= 2:
        report = edge_density(graph, selection, k)
        density, edges_inside = report.density, report.edges_inside
    else:
        density, edges_inside = float("nan"), 0
    return BaselineResult(
        selection,
        density,
        edges_inside,
        time.perf_counter() - start,
        iterations,
        stopped_by,
    )


def greedy_dks(graph: Graph, k: int) -> BaselineResult:
    """Min-degree peeling: drops a minimum-degree vertex (lowest index on ties) until k remain."""
    _check_k(graph, k)
    start = time.perf_counter()
    degrees = graph.degrees.astype(np.int64)
    alive = np.ones(graph.n, dtype=bool)
    heap = [(int(deg), vertex) for vertex, deg in enumerate(degrees)]
    heapq.heapify(heap)
    remaining = graph.n
    while remaining > k:
        deg, vertex = heapq.heappop(heap)
        if not alive[vertex] or deg != degrees[vertex]:
            continue  # stale entry
        alive[vertex] = False
        remaining -= 1
        for neighbor in graph.neighbors(vertex):
            if alive[neighbor]:
                degrees[neighbor] -= 1
                heapq.heappush(heap, (int(degrees[neighbor]), int(neighbor)))
    return _unipartite_result(
        graph, np.flatnonzero(alive), k, start, graph.n - k, "peeling"
    )


def tpm_dks(
    graph: Graph,
    k: int,
    max_iter: int = TPM_MAX_ITER,
    x0: Optional[np.ndarray] = None,
) -> BaselineResult:
    """Truncated power method ``x ← normalize(truncate_k(Ax))``.

    Stops when a support set repeats or after ``max_iter`` iterations. If ``Ax`` vanishes
    on the new support the previous support is kept.
    """
    _check_k(graph, k)
    start = time.perf_counter()
    if x0 is None:
        x0 = np.full(graph.n, 1.0 / graph.n)
    x = np.asarray(x0, dtype=np.float64)
    if x.shape != (graph.n,) or np.any(x < 0) or not np.any(x > 0):
        raise ValueError("x0 must be a nonnegative, nonzero vector of length n.")

    support = top_k_indices(x, k)
    seen = set()
    iteration = 0
    stopped_by = "max_iter"
    for iteration in range(1, max_iter + 1):
        image = spmv(graph, x)
        candidate = top_k_indices(image, k)
        values = image[candidate]
        if not np.any(values > 0):
            Log.log(f"TPM: zero image on support at iteration {iteration}.")
            stopped_by = "zero_image"
            break
        support = candidate
        x = np.zeros(graph.n)
        x[support] = values / np.linalg.norm(values)
        key = support.tobytes()
        if key in seen:
            stopped_by = "support_repeat"
            break
        seen.add(key)
    return _unipartite_result(graph, support, k, start, iteration, stopped_by)


def brute_force_dks(graph: Graph, k: int) -> BaselineResult:
    """Exhaustive maximizer of the induced edge count; lexicographically smallest on ties."""
    _check_k(graph, k)
    total = comb(graph.n, k, exact=True)
    if total > ORACLE_LIMIT:
        raise OracleTooLargeError("instance too large for oracle")
    start = time.perf_counter()
    dense = graph.to_dense()
    best, best_subset = -1.0, None
    for subset in itertools.combinations(range(graph.n), k):
        index = np.array(subset)
        twice_edges = dense[np.ix_(index, index)].sum()
        if twice_edges > best:
            best, best_subset = twice_edges, index
    return _unipartite_result(graph, best_subset, k, start, total, "exhaustive")


def brute_force_dkbs(graph: BipartiteGraph, k1: int, k2: int) -> BaselineResult:
    """Exhaustive maximizer of ``xᵀBy``; lexicographic tie-break on (row set, column set).

    For a fixed row set the best columns are the k2 largest column sums, lowest index
    first, so only row sets are enumerated.
    """
    if not 1 <= k1 <= graph.n1 or not 1 <= k2 <= graph.n2:
        raise ValueError(
            f"(k1, k2)=({k1}, {k2}) out of range ({graph.n1}, {graph.n2})."
        )
    total = comb(graph.n1, k1, exact=True) * comb(graph.n2, k2, exact=True)
    if total > ORACLE_LIMIT:
        raise OracleTooLargeError("instance too large for oracle")
    start = time.perf_counter()
    dense = graph.to_dense()
    best, best_rows, best_cols = -1.0, None, None
    for rows in itertools.combinations(range(graph.n1), k1):
        column_sums = dense[list(rows)].sum(axis=0)
        cols = top_k_indices(column_sums, k2)
        edges = column_sums[cols].sum()
        if edges > best:
            best, best_rows, best_cols = edges, np.array(rows), cols

    left, right = np.zeros(graph.n1), np.zeros(graph.n2)
    left[best_rows] = 1.0
    right[best_cols] = 1.0
    report = bipartite_density(graph, left, right, k1, k2)
    return BaselineResult(
        np.concatenate([left, right]),
        report.density,
        report.edges_inside,
        time.perf_counter() - start,
        comb(graph.n1, k1, exact=True),
        "exhaustive",
    )
