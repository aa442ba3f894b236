# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Sparse graph storage, edge-list ingestion, preprocessing and the linear-algebra
kernels consumed by the solvers."""

import io
from typing import Dict, Hashable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from densek.utils.log import Log

COMMENT_PREFIXES = {"snap": "#", "konect": "%"}

POWER_REL_TOL = 1e-6
POWER_MAX_ITER = 500
POWER_INFLATION = 0.05


class EdgeListParseError(ValueError):
    """Raised when an edge-list source cannot be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EdgeList:
    """Raw directed pairs as read from a file, before any cleaning.

    Attributes:
        edges (np.ndarray): ``(m, 2)`` array of internal vertex indices, in parse order.
        node_labels (dict): external label -> dense internal index.
    """

    def __init__(
        self,
        edges: Union[np.ndarray, Sequence[Tuple[int, int]]],
        node_labels: Dict[Hashable, int],
    ):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        num_labels = len(node_labels)
        if sorted(node_labels.values()) != list(range(num_labels)):
            raise ValueError("Node label indices must be 0-based and contiguous.")
        if edges.size and (edges.min() < 0 or edges.max() >= num_labels):
            raise ValueError(
                "Edge endpoints must be internal indices < number of labels."
            )
        self.edges = edges
        self.node_labels = dict(node_labels)

    @property
    def num_labels(self) -> int:
        """Returns the number of distinct labels."""
        return len(self.node_labels)

    def labels_by_index(self) -> np.ndarray:
        """Returns an array whose i-th entry is the external label of index i."""
        labels = np.empty(self.num_labels, dtype=object)
        for label, index in self.node_labels.items():
            labels[index] = label
        return labels

    def __len__(self):
        return self.edges.shape[0]

    def __repr__(self):
        return f"EdgeList(edges={len(self)}, labels={self.num_labels})"


def _freeze(*arrays):
    for array in arrays:
        array.setflags(write=False)


def _canonical_csr(rows, cols, shape) -> sparse.csr_matrix:
    """Builds a 0/1 CSR matrix with duplicates collapsed and sorted columns."""
    matrix = sparse.coo_matrix(
        (np.ones(len(rows), dtype=np.float64), (rows, cols)), shape=shape
    ).tocsr()
    matrix.sum_duplicates()
    matrix.data[:] = 1.0
    matrix.sort_indices()
    return matrix


class Graph:
    """Immutable simple undirected graph stored as a symmetric CSR adjacency.

    Every undirected edge is stored in both directions so a matrix-vector product is a
    single sweep over the rows.
    """

    def __init__(self, adjacency: sparse.csr_matrix, labels: Optional[Sequence] = None):
        adjacency = sparse.csr_matrix(adjacency, dtype=np.float64)
        adjacency.sort_indices()
        num_nodes = adjacency.shape[0]
        if adjacency.shape != (num_nodes, num_nodes):
            raise ValueError("Adjacency matrix must be square.")
        if adjacency.nnz and not np.all(adjacency.data == 1.0):
            raise ValueError("Adjacency entries must all be 1.")
        if adjacency.diagonal().any():
            raise ValueError("Graph must not contain self-loops.")
        if adjacency.nnz != adjacency.copy().tocoo().tocsr().nnz:
            raise ValueError("Graph must not contain duplicate entries.")
        if (adjacency != adjacency.T).nnz:
            raise ValueError("Adjacency matrix must be symmetric.")

        self._adjacency = adjacency
        _freeze(adjacency.data, adjacency.indices, adjacency.indptr)
        if labels is None:
            labels = np.arange(num_nodes)
        labels = np.asarray(labels, dtype=object)
        if labels.shape != (num_nodes,):
            raise ValueError("One label per vertex is required.")
        self._labels = labels
        _freeze(self._labels)

    @classmethod
    def from_edges(
        cls, num_nodes: int, edges: Iterable[Tuple[int, int]], labels=None
    ) -> "Graph":
        """Builds a graph from undirected pairs, dropping self-loops and duplicates."""
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        return cls(_canonical_csr(rows, cols, (num_nodes, num_nodes)), labels=labels)

    @property
    def n(self) -> int:  # pylint: disable=invalid-name
        """Returns the vertex count."""
        return self._adjacency.shape[0]

    @property
    def m(self) -> int:  # pylint: disable=invalid-name
        """Returns the undirected edge count."""
        return self._adjacency.nnz // 2

    @property
    def adjacency(self) -> sparse.csr_matrix:
        """Returns the read-only CSR adjacency matrix."""
        return self._adjacency

    @property
    def row_ptr(self) -> np.ndarray:
        """Returns the CSR row pointer array."""
        return self._adjacency.indptr

    @property
    def col_idx(self) -> np.ndarray:
        """Returns the CSR column index array."""
        return self._adjacency.indices

    @property
    def labels(self) -> np.ndarray:
        """Returns the external label of every internal vertex."""
        return self._labels

    @property
    def degrees(self) -> np.ndarray:
        """Returns the degree of every vertex."""
        return np.diff(self._adjacency.indptr)

    def neighbors(self, vertex: int) -> np.ndarray:
        """Returns the sorted neighbours of ``vertex``."""
        start, stop = self._adjacency.indptr[vertex], self._adjacency.indptr[vertex + 1]
        return self._adjacency.indices[start:stop]

    def to_dense(self) -> np.ndarray:
        """Returns the dense adjacency matrix (small graphs only)."""
        return self._adjacency.toarray()

    def to_edge_list(self) -> EdgeList:
        """Serializes the graph back to an edge list keyed by the original labels."""
        upper = sparse.triu(self._adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        edges = np.stack([upper.row[order], upper.col[order]], axis=1)
        return EdgeList(edges, {label: i for i, label in enumerate(self._labels)})

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class BipartiteGraph:
    """Immutable bipartite graph stored as a 0/1 biadjacency matrix and its transpose."""

    def __init__(
        self,
        biadjacency: sparse.csr_matrix,
        left_labels: Optional[Sequence] = None,
        right_labels: Optional[Sequence] = None,
    ):
        biadjacency = sparse.csr_matrix(biadjacency, dtype=np.float64)
        biadjacency.sort_indices()
        if biadjacency.nnz and not np.all(biadjacency.data == 1.0):
            raise ValueError("Biadjacency entries must all be 1.")
        if biadjacency.nnz != biadjacency.copy().tocoo().tocsr().nnz:
            raise ValueError("Biadjacency must not contain duplicate entries.")
        if np.any(np.diff(biadjacency.indptr) == 0) or np.any(
            np.bincount(biadjacency.indices, minlength=biadjacency.shape[1]) == 0
        ):
            raise ValueError("Bipartite graph must not contain isolated vertices.")

        self._biadjacency = biadjacency
        self._transpose = biadjacency.T.tocsr()
        self._transpose.sort_indices()
        _freeze(biadjacency.data, biadjacency.indices, biadjacency.indptr)
        _freeze(self._transpose.data, self._transpose.indices, self._transpose.indptr)

        num_left, num_right = biadjacency.shape
        self._left_labels = np.asarray(
            np.arange(num_left) if left_labels is None else left_labels, dtype=object
        )
        self._right_labels = np.asarray(
            np.arange(num_right) if right_labels is None else right_labels, dtype=object
        )
        if self._left_labels.shape != (num_left,) or self._right_labels.shape != (
            num_right,
        ):
            raise ValueError("One label per vertex is required on each side.")

    @classmethod
    def from_dense(cls, matrix) -> "BipartiteGraph":
        """Builds a bipartite graph from a dense 0/1 biadjacency matrix."""
        matrix = np.asarray(matrix)
        rows, cols = np.nonzero(matrix)
        return cls(_canonical_csr(rows, cols, matrix.shape))

    @property
    def n1(self) -> int:
        """Returns the number of left vertices."""
        return self._biadjacency.shape[0]

    @property
    def n2(self) -> int:
        """Returns the number of right vertices."""
        return self._biadjacency.shape[1]

    @property
    def m(self) -> int:  # pylint: disable=invalid-name
        """Returns the edge count."""
        return self._biadjacency.nnz

    @property
    def n(self) -> int:  # pylint: disable=invalid-name
        """Returns the size of the stacked variable ``(x, y)``."""
        return self.n1 + self.n2

    @property
    def biadjacency(self) -> sparse.csr_matrix:
        """Returns B."""
        return self._biadjacency

    @property
    def biadjacency_t(self) -> sparse.csr_matrix:
        """Returns Bᵀ as its own CSR matrix."""
        return self._transpose

    @property
    def left_labels(self) -> np.ndarray:
        """Returns the external labels of the left side."""
        return self._left_labels

    @property
    def right_labels(self) -> np.ndarray:
        """Returns the external labels of the right side."""
        return self._right_labels

    def to_dense(self) -> np.ndarray:
        """Returns the dense biadjacency matrix (small graphs only)."""
        return self._biadjacency.toarray()

    def __repr__(self):
        return f"BipartiteGraph(n1={self.n1}, n2={self.n2}, m={self.m})"


class BlockAdjacency:
    """Read-only view of the symmetric block matrix ``[[0, B], [Bᵀ, 0]]``.

    Products are formed from B and Bᵀ; the block matrix is never materialised.
    """

    def __init__(self, bipartite_graph: BipartiteGraph):
        self.graph = bipartite_graph
        self.n1 = bipartite_graph.n1
        self.n = bipartite_graph.n

    def dot(self, vector: np.ndarray) -> np.ndarray:
        """Returns ``A @ vector`` for the block matrix A."""
        out = np.empty(self.n, dtype=np.float64)
        out[: self.n1] = self.graph.biadjacency @ vector[self.n1 :]
        out[self.n1 :] = self.graph.biadjacency_t @ vector[: self.n1]
        return out


def as_operator(graph) -> Tuple[int, callable]:
    """Returns ``(n, matvec)`` for a Graph, BipartiteGraph or BlockAdjacency."""
    if isinstance(graph, Graph):
        return graph.n, graph.adjacency.dot
    if isinstance(graph, BipartiteGraph):
        graph = BlockAdjacency(graph)
    if isinstance(graph, BlockAdjacency):
        return graph.n, graph.dot
    raise TypeError(f"Unsupported graph type {type(graph).__name__}.")


def load_edge_list(source, fmt: str = "snap") -> EdgeList:
    """Parses a SNAP or KONECT edge list.

    Args:
        source: binary or text stream, UTF-8, newline-delimited.
        fmt: ``"snap"`` (``#`` comments, exactly ``u v`` per line) or ``"konect"``
            (``%`` comments, ``u v [weight [timestamp]]`` per line, trailing fields dropped).

    Returns:
        The parsed pairs with labels remapped to dense indices in order of first appearance.

    Raises:
        EdgeListParseError: on a malformed line or when no edge is found.
    """
    if fmt not in COMMENT_PREFIXES:
        raise ValueError(f"Unknown edge-list format '{fmt}'.")
    comment = COMMENT_PREFIXES[fmt]
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)

    node_labels: Dict[int, int] = {}
    edges = []
    line_number = 0
    for line_number, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line.startswith(comment):
            continue
        tokens = line.split()
        if len(tokens) < 2 or (fmt == "snap" and len(tokens) != 2):
            raise EdgeListParseError(f"expected 'u v', got '{line}'", line_number)
        try:
            src, dst = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(  # pylint: disable=raise-missing-from
                f"non-integer vertex id in '{line}'", line_number
            )
        for label in (src, dst):
            if label not in node_labels:
                node_labels[label] = len(node_labels)
        edges.append((node_labels[src], node_labels[dst]))

    if not edges:
        raise EdgeListParseError("empty edge list", line_number)
    Log.log(f"Parsed {len(edges)} {fmt} pairs over {len(node_labels)} labels.")
    return EdgeList(edges, node_labels)


def preprocess_unipartite(edge_list: EdgeList) -> Graph:
    """Symmetrizes, drops self-loops and duplicates, keeps the largest component.

    Ties between equal-size components go to the one holding the smallest internal
    index. Surviving vertices keep their relative order and are reindexed densely.
    """
    if len(edge_list) == 0:
        raise ValueError("Edge list is empty.")
    num_labels = edge_list.num_labels
    pairs = edge_list.edges[edge_list.edges[:, 0] != edge_list.edges[:, 1]]
    if pairs.shape[0] == 0:
        raise ValueError("empty graph after preprocessing")
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    adjacency = _canonical_csr(rows, cols, (num_labels, num_labels))

    _, component = connected_components(adjacency, directed=False)
    sizes = np.bincount(component)
    _, first_vertex = np.unique(component, return_index=True)
    # largest size first, then smallest minimum index
    best = np.lexsort((first_vertex, -sizes))[0]
    keep = np.flatnonzero(component == best)

    adjacency = adjacency[keep][:, keep].tocsr()
    if adjacency.nnz == 0:
        raise ValueError("empty graph after preprocessing")
    graph = Graph(adjacency, labels=edge_list.labels_by_index()[keep])
    Log.log(f"Preprocessed unipartite graph: n={graph.n}, m={graph.m}.")
    return graph


def preprocess_bipartite(edge_list: EdgeList) -> BipartiteGraph:
    """Builds a simple 0/1 bipartite graph from the two label columns.

    The first column gives the left side and the second the right side; each side is
    reindexed on its own. Multi-edges collapse and vertices without edges are dropped.
    """
    if len(edge_list) == 0:
        raise ValueError("Edge list is empty.")
    labels = edge_list.labels_by_index()
    left, left_index = np.unique(edge_list.edges[:, 0], return_inverse=True)
    right, right_index = np.unique(edge_list.edges[:, 1], return_inverse=True)
    biadjacency = _canonical_csr(left_index, right_index, (left.size, right.size))
    if biadjacency.nnz == 0:
        raise ValueError("empty graph after preprocessing")
    graph = BipartiteGraph(biadjacency, labels[left], labels[right])
    Log.log(f"Preprocessed bipartite graph: n1={graph.n1}, n2={graph.n2}, m={graph.m}.")
    return graph


def spmv(graph, vector) -> np.ndarray:
    """Returns ``A @ vector``; for a bipartite graph A is the block adjacency."""
    num_nodes, matvec = as_operator(graph)
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (num_nodes,):
        raise ValueError(
            f"Vector of length {vector.shape} does not match graph size {num_nodes}."
        )
    return matvec(vector)


def spectral_norm_estimate(
    graph,
    rel_tol: float = POWER_REL_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
    inflation: float = POWER_INFLATION,
) -> float:
    """Power-iteration estimate of ``‖A‖₂``, inflated by ``1 + inflation``.

    ``‖A v‖`` for a unit ``v`` never exceeds ``‖A‖₂``, so the raw estimate approaches
    the norm from below; the inflation keeps downstream Lipschitz constants safe.
    """
    num_nodes, matvec = as_operator(graph)
    if getattr(graph, "m", 1) < 1:
        raise ValueError("Spectral norm needs at least one edge.")
    vector = np.random.default_rng(seed).random(num_nodes) + 0.5
    vector /= np.linalg.norm(vector)

    sigma = 0.0
    for iteration in range(1, max_iter + 1):
        image = matvec(vector)
        sigma_new = float(np.linalg.norm(image))
        if sigma_new == 0.0:
            break
        vector = image / sigma_new
        converged = abs(sigma_new - sigma) <= rel_tol * sigma_new
        sigma = sigma_new
        if converged:
            break
    Log.log(f"Power iteration: sigma={sigma:.6g} after {iteration} iterations.")
    return sigma * (1.0 + inflation)


def erdos_renyi(num_nodes: int, prob: float, seed: int) -> Graph:
    """Seeded G(n, p) test instance (no preprocessing applied)."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < prob, k=1)
    return Graph.from_edges(num_nodes, np.argwhere(upper))


def random_biadjacency(num_left: int, num_right: int, prob: float, seed: int):
    """Seeded random bipartite test instance, preprocessed (isolated vertices dropped)."""
    rng = np.random.default_rng(seed)
    rows, cols = np.nonzero(rng.random((num_left, num_right)) < prob)
    labels = {("L", i): i for i in range(num_left)}
    labels.update({("R", j): num_left + j for j in range(num_right)})
    edges = np.stack([rows, num_left + cols], axis=1)
    return preprocess_bipartite(EdgeList(edges, labels))
