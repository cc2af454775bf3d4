# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import logging
import math
import os
from dataclasses import dataclass
from typing import Iterable
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import networkx as nx
import numpy as np

from .exceptions import NonSymmetricMatrixError

log = logging.getLogger("swarmsim.graph")

DEFAULT_EDGE_THRESHOLD = 0.01

# alias: a symmetric n x n array with zero row sums
LaplacianMatrix = np.ndarray


@dataclass(frozen=True)
class CommParams:
    """ Range-dependent link model: full strength inside ``rho``, exponential decay up to ``big_r``.

    The model is discontinuous at ``big_r``: approaching from below the strength tends to
    exp(-gamma_c), at ``big_r`` and beyond it is 0.
    """
    rho: float = 40.0
    big_r: float = 120.0
    gamma_c: float = 2.0

    def __post_init__(self):
        if not 0 < self.rho < self.big_r:
            raise ValueError(f"Expected 0 < rho < big_r, got rho={self.rho}, big_r={self.big_r}")
        if self.gamma_c <= 0:
            raise ValueError(f"Expected gamma_c > 0, got {self.gamma_c}")

    @property
    def decay_rate(self) -> float:
        """ d(log strength)/d(distance) inside the decay band """
        return -self.gamma_c / (self.big_r - self.rho)


@dataclass(eq=False)
class WeightedGraph:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"Expected a square weight matrix, got shape {w.shape}")
        if not np.allclose(w, w.T, atol=1e-12, rtol=0.0):
            raise ValueError("Expected symmetric weights")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("Expected weights in [0, 1]")
        if np.any(np.diag(w) != 0):
            raise ValueError("Expected zero diagonal (no self-edges)")
        self.weights = w

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def adjacency(self, threshold: float = 0.0) -> np.ndarray:
        """ Boolean adjacency; with threshold 0 every positive weight is an edge """
        if threshold > 0:
            return self.weights >= threshold
        return self.weights > 0

    def neighbors(self, i: int, threshold: float = 0.0) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.adjacency(threshold)[i]))

    def degrees(self, threshold: float = DEFAULT_EDGE_THRESHOLD) -> np.ndarray:
        return self.adjacency(threshold).sum(axis=1)

    def weighted_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def to_networkx(self, threshold: float = DEFAULT_EDGE_THRESHOLD) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        rows, cols = np.nonzero(np.triu(self.adjacency(threshold), k=1))
        graph.add_weighted_edges_from((int(i), int(j), float(self.weights[i, j])) for i, j in zip(rows, cols))
        return graph

    def is_connected(self, threshold: float = DEFAULT_EDGE_THRESHOLD) -> bool:
        return nx.is_connected(self.to_networkx(threshold)) if self.n > 0 else False

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, float]]) -> "WeightedGraph":
        w = np.zeros((n, n))
        for i, j, weight in edges:
            if i == j:
                raise ValueError(f"Self-edge on node {i}")
            w[i, j] = w[j, i] = weight
        return cls(w)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "WeightedGraph":
        """ Unit weights unless the edge carries a ``weight`` attribute; nodes are relabelled 0..n-1 """
        nodes = sorted(graph.nodes())
        index = {node: k for k, node in enumerate(nodes)}
        return cls.from_edges(
            len(nodes),
            ((index[u], index[v], float(data.get("weight", 1.0))) for u, v, data in graph.edges(data=True)),
        )


@dataclass(eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    # columns are eigenvectors
    eigenvectors: np.ndarray

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1]) if len(self.eigenvalues) > 1 else 0.0


def comm_strength(distance: float, params: CommParams) -> float:
    if distance < 0:
        raise ValueError(f"Expected distance >= 0, got {distance}")
    if distance < params.rho:
        return 1.0
    if distance >= params.big_r:
        return 0.0
    return math.exp(params.decay_rate * (distance - params.rho))


def comm_strength_array(distances: np.ndarray, params: CommParams) -> np.ndarray:
    """ Vectorised comm_strength """
    d = np.asarray(distances, dtype=float)
    band = np.exp(params.decay_rate * (d - params.rho))
    return np.where(d < params.rho, 1.0, np.where(d >= params.big_r, 0.0, band))


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    x = np.asarray(positions, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def build_comm_graph(positions: Union[Sequence[Sequence[float]], np.ndarray], params: CommParams) -> WeightedGraph:
    x = np.asarray(positions, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"Expected an (n, d) array of positions with n >= 1, got shape {x.shape}")
    w = comm_strength_array(pairwise_distances(x), params)
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w)


def laplacian(g: WeightedGraph) -> LaplacianMatrix:
    return np.diag(g.weighted_degrees()) - g.weights


def unweighted_laplacian(g: WeightedGraph, threshold: float = DEFAULT_EDGE_THRESHOLD) -> LaplacianMatrix:
    a = g.adjacency(threshold).astype(float)
    return np.diag(a.sum(axis=1)) - a


def apply_sign_convention(vector: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """ Flip so the first component with magnitude above tol is positive """
    v = np.asarray(vector, dtype=float)
    nonzero = np.flatnonzero(np.abs(v) > tol)
    if nonzero.size and v[nonzero[0]] < 0:
        return -v
    return v


def spectrum(L: LaplacianMatrix) -> SpectralDecomposition:
    m = np.asarray(L, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetricMatrixError(f"Expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not np.allclose(m, m.T, atol=1e-12 * scale, rtol=0.0):
        raise NonSymmetricMatrixError("spectrum requires a symmetric matrix")
    eigenvalues, eigenvectors = np.linalg.eigh(m)
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    for k in range(eigenvectors.shape[1]):
        eigenvectors[:, k] = apply_sign_convention(eigenvectors[:, k])
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def fiedler_pair(decomposition: SpectralDecomposition, cluster_tol: float = 1e-9) -> Tuple[float, np.ndarray]:
    """ lambda2 and a unit Fiedler vector from an existing decomposition.

    When lambda2 is repeated (including the disconnected case where it equals lambda1 = 0) the
    returned vector is the direction of the lambda2 eigenspace with the least all-ones component.
    """
    lam = decomposition.eigenvalues
    if len(lam) < 2:
        raise ValueError("algebraic connectivity needs at least two nodes")
    lambda2 = float(lam[1])
    cluster = np.flatnonzero(np.abs(lam - lambda2) <= cluster_tol * max(1.0, abs(lambda2)))
    basis = decomposition.eigenvectors[:, cluster]
    basis = basis - basis.mean(axis=0, keepdims=True)
    u, _, _ = np.linalg.svd(basis, full_matrices=False)
    fiedler = u[:, 0] / np.linalg.norm(u[:, 0])
    return max(lambda2, 0.0), apply_sign_convention(fiedler)


def algebraic_connectivity(L: LaplacianMatrix, cluster_tol: float = 1e-9) -> Tuple[float, np.ndarray]:
    """ Second-smallest Laplacian eigenvalue and a unit eigenvector orthogonal to the all-ones vector """
    return fiedler_pair(spectrum(L), cluster_tol)


def sample_connected_positions(
    n: int,
    side: float,
    params: CommParams,
    rng: np.random.Generator,
    threshold: float = DEFAULT_EDGE_THRESHOLD,
    dimension: int = 2,
    max_attempts: int = 10_000,
) -> np.ndarray:
    """ Uniform positions in a square of ``side`` metres, redrawn until the comm graph is connected """
    for attempt in range(max_attempts):
        positions = rng.uniform(0.0, side, size=(n, dimension))
        if n == 1 or build_comm_graph(positions, params).is_connected(threshold):
            log.debug("Connected placement found after %d attempt(s)", attempt + 1)
            return positions
    raise ValueError(f"No connected placement of {n} agents in a {side} m square after {max_attempts} attempts")


def load_edge_list(path: Union[str, os.PathLike], n: Optional[int] = None) -> WeightedGraph:
    """ Read ``i j w`` lines (0-based ids); blank lines and ``#`` comments are skipped """
    edges = []
    seen = {}
    declared_n = None
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            header = line.strip()
            if header.startswith("# n="):
                try:
                    declared_n = int(header[4:])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: invalid node count {header[4:].strip()!r}")
                if declared_n < 0:
                    raise ValueError(f"{path}:{lineno}: invalid node count {declared_n}")
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j w', got {line!r}")
            try:
                i, j, w = int(fields[0]), int(fields[1]), float(fields[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: could not parse {line!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate edge {key[0]} {key[1]} (first on line {seen[key]})")
            seen[key] = lineno
            edges.append((i, j, w))
    max_id = max((max(i, j) for i, j, _ in edges), default=-1)
    if n is None:
        n = declared_n if declared_n is not None else max_id + 1
    if max_id >= n:
        raise ValueError(f"Node id {max_id} out of range for n={n}")
    return WeightedGraph.from_edges(max(n, 1), edges)


def write_edge_list(g: WeightedGraph, path: Union[str, os.PathLike]) -> None:
    with open(path, "w") as f:
        f.write(f"# n={g.n}\n")
        rows, cols = np.nonzero(np.triu(g.weights, k=1))
        for i, j in zip(rows, cols):
            f.write(f"{i} {j} {float(g.weights[i, j])!r}\n")
