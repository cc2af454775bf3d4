# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
"""
Distributed estimation of the node count, lambda2 and the Fiedler vector.

Every node only ever combines its own values with those of its neighbours in
synchronous rounds. An estimation epoch runs on a frozen graph in three stages:

1. discovery: identifier sets are flooded until they stop growing, which gives
   every node the node count; the maximum weighted degree is agreed on by
   max-consensus alongside and fixes the step size alpha = 1 / (2 d_max).
2. power: nodes propagate their rows of D**k with D = I - alpha L. The infinity
   norm of P**k = D**k - 11'/n is agreed on by max-consensus and its k-th root
   converges to the spectral radius of P, hence lambda2 = (1 - rho(P)) / alpha.
3. fiedler: rows of D**k are flooded until every node holds the full matrix,
   which shares its eigenvectors with the Laplacian.

Node ids are the dense graph indices 0..n-1; the protocol itself only compares and
collects them, so any totally ordered identifiers would do.
"""
import csv
import logging
import math
import os
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from .exceptions import EstimatorError
from .graph import apply_sign_convention
from .graph import laplacian
from .graph import LaplacianMatrix
from .graph import WeightedGraph

log = logging.getLogger("swarmsim.spectral")

TRACE_HEADER = ("round", "node", "stage", "|Id|", "P_i", "lambda2_hat")

FIEDLER_DEGENERACY_GAP = 1e-8


@dataclass
class PowerIterationParams:
    # None: alpha = 1 / (2 d_max) with d_max found by max-consensus
    alpha: Optional[float] = None
    k_max: int = 500
    rho_tolerance: float = 1e-3
    # below this norm the entries of D**k - 1/n are mostly cancellation error
    norm_floor: float = 1e-13

    def __post_init__(self):
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError(f"Expected alpha > 0, got {self.alpha}")
        if self.k_max < 1:
            raise ValueError(f"Expected k_max >= 1, got {self.k_max}")
        if self.rho_tolerance <= 0:
            raise ValueError(f"Expected rho_tolerance > 0, got {self.rho_tolerance}")
        if self.norm_floor < 0:
            raise ValueError(f"Expected norm_floor >= 0, got {self.norm_floor}")


@dataclass(eq=False)
class DeflatedPerron:
    d_matrix: np.ndarray
    p_matrix: np.ndarray
    alpha: float
    # False when alpha >= 1/lambda_n and the estimate cannot be trusted
    valid: bool = True


def deflated_perron(L: LaplacianMatrix, alpha: float) -> DeflatedPerron:
    if alpha <= 0:
        raise ValueError(f"Expected alpha > 0, got {alpha}")
    m = np.asarray(L, dtype=float)
    n = m.shape[0]
    d = np.eye(n) - alpha * m
    p = d - np.full((n, n), 1.0 / n)
    lambda_n = float(np.linalg.eigvalsh(m)[-1]) if n else 0.0
    valid = alpha * lambda_n < 1.0
    if not valid:
        log.warning("alpha=%g is not below 1/lambda_n=%g; the lambda2 estimate is invalid", alpha, 1 / lambda_n)
    return DeflatedPerron(d_matrix=d, p_matrix=p, alpha=alpha, valid=valid)


@dataclass
class SpectralNodeState:
    node_id: int
    # ascending
    id_set: Tuple[int, ...]
    # row node_id of D**k restricted to id_set
    d_row: Dict[int, float]
    k: int = 0
    previous_id_set: Optional[Tuple[int, ...]] = None
    n_hat: Optional[int] = None
    k_star: Optional[int] = None
    alpha: Optional[float] = None
    lambda2_hat: Optional[float] = None
    fiedler_hat: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, node_id: int) -> "SpectralNodeState":
        return cls(node_id=node_id, id_set=(node_id,), d_row={node_id: 1.0})

    def restart(self) -> "SpectralNodeState":
        """ Fresh round-0 row that keeps what discovery learned """
        return replace(
            self,
            id_set=(self.node_id,),
            d_row={self.node_id: 1.0},
            k=0,
            previous_id_set=None,
            lambda2_hat=None,
            fiedler_hat=None,
        )


@dataclass
class TraceRecord:
    round: int
    node: int
    stage: str
    id_count: int
    p_i: Optional[float] = None
    lambda2_hat: Optional[float] = None

    def as_row(self) -> Tuple:
        return (
            self.round,
            self.node,
            self.stage,
            self.id_count,
            "" if self.p_i is None else repr(self.p_i),
            "" if self.lambda2_hat is None else repr(self.lambda2_hat),
        )


@dataclass
class SpectralEstimate:
    n_hat: np.ndarray
    k_star: np.ndarray
    alpha: float
    # power rounds run before the stopping rule fired
    rounds: int
    lambda2_hat: np.ndarray
    # lambda2_hat after every power round, shape (rounds, n)
    history: np.ndarray
    # row i is node i's estimate; None when not requested or n < 2
    fiedler_hat: Optional[np.ndarray] = None
    degenerate: bool = False
    states: List[SpectralNodeState] = field(default_factory=list)
    trace: List[TraceRecord] = field(default_factory=list)


def _closed_neighbourhoods(g: WeightedGraph) -> np.ndarray:
    return g.adjacency() | np.eye(g.n, dtype=bool)


def _check_states(states: Sequence[SpectralNodeState], g: WeightedGraph) -> None:
    if [s.node_id for s in states] != list(range(g.n)):
        raise ValueError("Expected one state per node, ordered by node id")


def _to_dense(states: Sequence[SpectralNodeState]) -> Tuple[np.ndarray, np.ndarray]:
    n = len(states)
    rows = np.zeros((n, n))
    members = np.zeros((n, n), dtype=bool)
    for i, s in enumerate(states):
        members[i, list(s.id_set)] = True
        for j, value in s.d_row.items():
            rows[i, j] = value
    return rows, members


def _power_step(
    rows: np.ndarray, members: np.ndarray, d: np.ndarray, closed: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    # d[i, j'] vanishes outside the closed neighbourhood, so node i only reads neighbours
    return d @ rows, (closed.astype(np.int64) @ members.astype(np.int64)) > 0


def _advance(states: Sequence[SpectralNodeState], g: WeightedGraph, d: np.ndarray) -> List[SpectralNodeState]:
    _check_states(states, g)
    rows, members = _power_step(*_to_dense(states), d, _closed_neighbourhoods(g))
    updated = []
    for i, s in enumerate(states):
        ids = tuple(int(j) for j in np.flatnonzero(members[i]))
        updated.append(replace(
            s,
            id_set=ids,
            d_row={j: float(rows[i, j]) for j in ids},
            k=s.k + 1,
            previous_id_set=s.id_set,
        ))
    return updated


def matrix_power_round(
    states: Sequence[SpectralNodeState], g: WeightedGraph, dp: DeflatedPerron
) -> List[SpectralNodeState]:
    """ One synchronous round: union the neighbours' id sets and multiply the row by D """
    return _advance(states, g, dp.d_matrix)


def discovery_round(states: Sequence[SpectralNodeState], g: WeightedGraph) -> List[SpectralNodeState]:
    """ Id flooding only; rows stay those of D**0 """
    return _advance(states, g, np.eye(g.n))


def detect_count(state: SpectralNodeState) -> Optional[int]:
    """ Node count once the id set stopped growing; the size of the node's component on a disconnected graph """
    if state.n_hat is not None:
        return state.n_hat
    if state.previous_id_set is not None and state.previous_id_set == state.id_set:
        state.n_hat = len(state.id_set)
        state.k_star = state.k
        return state.n_hat
    return None


def max_consensus_round(values: Sequence[float], g: WeightedGraph) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.where(_closed_neighbourhoods(g), v[None, :], -np.inf).max(axis=1)


def _max_consensus(values: np.ndarray, closed: np.ndarray, rounds: int) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    for _ in range(rounds):
        v = np.where(closed, v[None, :], -np.inf).max(axis=1)
    return v


def _row_norm_terms(rows: np.ndarray, members: np.ndarray, n_hat: np.ndarray) -> np.ndarray:
    inv_n = 1.0 / n_hat[:, None]
    return np.where(members, np.abs(rows - inv_n), 0.0).sum(axis=1) + (n_hat - members.sum(axis=1)) / n_hat


def _gelfand_lambda2(norm: np.ndarray, k: int, alpha: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        rho = np.where(norm > 0, np.exp(np.log(np.maximum(norm, 0.0)) / k), 0.0)
    return (1.0 - rho) / alpha


def _require_counts(states: Sequence[SpectralNodeState]) -> Tuple[np.ndarray, float]:
    if any(s.n_hat is None for s in states):
        raise EstimatorError("node count not detected yet; run discovery first")
    alphas = {s.alpha for s in states}
    if len(alphas) != 1 or None in alphas:
        raise EstimatorError("states do not share a step size alpha")
    return np.array([s.n_hat for s in states], dtype=float), alphas.pop()


def estimate_lambda2(
    states: Sequence[SpectralNodeState], k: int, g: WeightedGraph
) -> np.ndarray:
    """ Per-node lambda2 estimate from the round-k rows; agreement on the norm takes n_hat - 1 max-consensus rounds """
    if k < 1:
        raise EstimatorError(f"the estimate needs k >= 1, got k={k}")
    if any(s.k != k for s in states):
        raise EstimatorError(f"states are not at round {k}")
    _check_states(states, g)
    n_hat, alpha = _require_counts(states)
    rows, members = _to_dense(states)
    norm = _max_consensus(_row_norm_terms(rows, members, n_hat), _closed_neighbourhoods(g), int(n_hat.max()) - 1)
    estimates = np.where(n_hat > 1, _gelfand_lambda2(norm, k, alpha), 0.0)
    for s, value in zip(states, estimates):
        s.lambda2_hat = float(value)
    return estimates


def _fiedler_from_power(matrix: np.ndarray, k: int, alpha: float) -> Tuple[np.ndarray, bool]:
    n = matrix.shape[0]
    mu, vectors = np.linalg.eigh((matrix + matrix.T) / 2)
    ones = np.ones(n) / math.sqrt(n)
    drop = int(np.argmax(np.abs(ones @ vectors)))
    keep = [c for c in range(n) if c != drop]
    mu, vectors = mu[keep], vectors[:, keep]
    order = np.argsort(mu)[::-1]
    fiedler = vectors[:, order[0]]
    fiedler = apply_sign_convention(fiedler / np.linalg.norm(fiedler))
    degenerate = False
    if len(order) > 1:
        lam = (1.0 - np.maximum(mu[order[:2]], 0.0) ** (1.0 / k)) / alpha
        degenerate = bool(lam[1] - lam[0] < FIEDLER_DEGENERACY_GAP)
    return fiedler, degenerate


def estimate_fiedler(states: Sequence[SpectralNodeState], g: WeightedGraph) -> Tuple[np.ndarray, bool]:
    """ Flood (row id, row) pairs for n_hat rounds, then eigendecompose the assembled D**k on every node.

    Returns one row per node and whether lambda2 looked repeated.
    """
    _check_states(states, g)
    n_hat, alpha = _require_counts(states)
    k = states[0].k
    if k < 1 or any(s.k != k for s in states):
        raise EstimatorError("Fiedler assembly needs every node at the same round k >= 1")
    n = g.n
    rows, _ = _to_dense(states)
    closed = _closed_neighbourhoods(g)
    # known[i, r]: node i holds row r
    known = np.eye(n, dtype=bool)
    for _ in range(int(n_hat.max())):
        known = (closed.astype(np.int64) @ known.astype(np.int64)) > 0
    estimates = np.zeros((n, n))
    degenerate = False
    for i, s in enumerate(states):
        held = np.flatnonzero(known[i])
        if len(held) < 2:
            s.fiedler_hat = None
            continue
        vector, flag = _fiedler_from_power(rows[np.ix_(held, held)], k, alpha)
        estimates[i, held] = vector
        s.fiedler_hat = estimates[i].copy()
        degenerate |= flag
    if degenerate:
        log.info("lambda2 eigenspace looks repeated; Fiedler estimate is one vector of it")
    return estimates, degenerate


class DistributedSpectralEstimator:
    """ Runs one estimation epoch on a frozen graph """

    def __init__(self, g: WeightedGraph, params: Optional[PowerIterationParams] = None, record_trace: bool = False):
        self.log = logging.getLogger("swarmsim.estimator")
        self.g = g
        self.params = params or PowerIterationParams()
        self.record_trace = record_trace
        self.trace: List[TraceRecord] = []
        self._closed = _closed_neighbourhoods(g)

    def _record(self, k: int, stage: str, members: np.ndarray, p_i=None, lam=None) -> None:
        if not self.record_trace:
            return
        for i in range(self.g.n):
            self.trace.append(TraceRecord(
                round=k,
                node=i,
                stage=stage,
                id_count=int(members[i].sum()),
                p_i=None if p_i is None else float(p_i[i]),
                lambda2_hat=None if lam is None else float(lam[i]),
            ))

    def discover(self) -> List[SpectralNodeState]:
        """ Id flooding with max-consensus on the weighted degree until every node detected the count """
        g = self.g
        states = [SpectralNodeState.initial(i) for i in range(g.n)]
        d_max = g.weighted_degrees()
        k = 0
        while any(s.n_hat is None for s in states):
            states = discovery_round(states, g)
            d_max = max_consensus_round(d_max, g)
            k += 1
            for s in states:
                detect_count(s)
            self._record(k, "discovery", _to_dense(states)[1])
            if k > g.n + 1:
                raise EstimatorError("id sets kept growing past n rounds")
        d_hat = float(d_max.max())
        alpha = self.params.alpha if self.params.alpha is not None else (1.0 / (2 * d_hat) if d_hat > 0 else 1.0)
        self.log.debug("Discovery done after %d rounds: n_hat=%s alpha=%g", k, [s.n_hat for s in states], alpha)
        return [replace(s, alpha=alpha) for s in states]

    def run(self, fiedler: bool = True) -> SpectralEstimate:
        g = self.g
        params = self.params
        states = self.discover()
        n_hat = np.array([s.n_hat for s in states], dtype=float)
        k_star = np.array([s.k_star for s in states], dtype=int)
        alpha = states[0].alpha
        dp = deflated_perron(laplacian(g), alpha)
        rows, members = _to_dense([s.restart() for s in states])
        consensus_rounds = int(n_hat.max()) - 1

        history = []
        estimate = np.zeros(g.n)
        if n_hat.max() > 1:
            for k in range(1, params.k_max + 1):
                rows, members = _power_step(rows, members, dp.d_matrix, self._closed)
                p_i = _row_norm_terms(rows, members, n_hat)
                norm = _max_consensus(p_i, self._closed, consensus_rounds)
                if history and float(norm.max()) < params.norm_floor:
                    self.log.debug("Stopping at k=%d: norm %.3g below floor", k, float(norm.max()))
                    break
                current = np.where(n_hat > 1, _gelfand_lambda2(norm, k, alpha), 0.0)
                self._record(k, "power", members, p_i, current)
                history.append(current)
                previous, estimate = estimate, current
                if k >= 2 and np.all(k * np.abs(current - previous) <= params.rho_tolerance * np.abs(current)):
                    self.log.debug("Stopping at k=%d: lambda2_hat=%.6g", k, float(current.max()))
                    break
            else:
                self.log.info("lambda2 estimate hit k_max=%d before the stopping rule", params.k_max)

        final_states = [replace(s, k=len(history), lambda2_hat=float(lam)) for s, lam in zip(states, estimate)]
        result = SpectralEstimate(
            n_hat=n_hat.astype(int),
            k_star=k_star,
            alpha=alpha,
            rounds=len(history),
            lambda2_hat=estimate,
            history=np.array(history).reshape(len(history), g.n),
            states=final_states,
        )
        if fiedler and n_hat.max() > 1:
            # rows of D**k at the latest detection round, agreed on by max-consensus
            k_fiedler = int(_max_consensus(k_star, self._closed, consensus_rounds).max())
            fiedler_states = [s.restart() for s in states]
            for _ in range(k_fiedler):
                fiedler_states = matrix_power_round(fiedler_states, g, dp)
            result.fiedler_hat, result.degenerate = estimate_fiedler(fiedler_states, g)
            self._record(k_fiedler, "fiedler", _to_dense(fiedler_states)[1])
            for s, fs in zip(final_states, fiedler_states):
                s.fiedler_hat = fs.fiedler_hat
        result.trace = list(self.trace)
        self.log.info(
            "Estimation epoch: n=%d rounds=%d lambda2_hat=%.6g degenerate=%s",
            g.n, result.rounds, float(estimate.max()), result.degenerate,
        )
        return result


def estimate_spectrum(
    g: WeightedGraph,
    params: Optional[PowerIterationParams] = None,
    fiedler: bool = True,
    record_trace: bool = False,
) -> SpectralEstimate:
    return DistributedSpectralEstimator(g, params, record_trace=record_trace).run(fiedler=fiedler)


def write_trace(records: Sequence[TraceRecord], path: Union[str, os.PathLike]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for record in records:
            writer.writerow(record.as_row())
