# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Edge-density metrics shared by every solver."""

from typing import Optional

import numpy as np

from densek.core.ep_prox_result import AuxiliaryResults
from densek.core.graph import BipartiteGraph, Graph


class DensityReport(AuxiliaryResults):
    """Edge density of a selection."""

    def __init__(
        self, density: float, edges_inside: int, k1: int, k2: Optional[int] = None
    ):
        """Density report.

        Args:
            density: normalized edge count in [0, 1].
            edges_inside: number of edges induced by the selection.
            k1: cardinality (the only one for unipartite selections).
            k2: right-side cardinality for bipartite selections.
        """
        self.density = density
        self.edges_inside = edges_inside
        self.k1 = k1
        self.k2 = k2

    @property
    def k(self) -> int:
        """Returns the unipartite cardinality."""
        return self.k1


def _check_selection(selection: np.ndarray, k: int, size: int, name: str) -> np.ndarray:
    selection = np.asarray(selection, dtype=np.float64)
    if selection.shape != (size,):
        raise ValueError(f"{name} has length {selection.shape}, expected {size}.")
    if not np.all((selection == 0.0) | (selection == 1.0)) or selection.sum() != k:
        raise ValueError(f"{name} is not a binary vector with exactly {k} ones.")
    return selection


def edge_density(graph: Graph, selection: np.ndarray, k: int) -> DensityReport:
    """Unipartite edge density ``xᵀAx / (k(k-1))``."""
    if k < 2:
        raise ValueError("density undefined for k < 2")
    selection = _check_selection(selection, k, graph.n, "selection")
    twice_edges = float(selection @ (graph.adjacency @ selection))
    return DensityReport(twice_edges / (k * (k - 1)), int(round(twice_edges / 2)), k)


def bipartite_density(
    graph: BipartiteGraph, x: np.ndarray, y: np.ndarray, k1: int, k2: int
) -> DensityReport:
    """Bipartite edge density ``xᵀBy / (k1 k2)``."""
    x = _check_selection(x, k1, graph.n1, "left selection")
    y = _check_selection(y, k2, graph.n2, "right selection")
    edges = float(x @ (graph.biadjacency @ y))
    return DensityReport(edges / (k1 * k2), int(round(edges)), k1, k2)
