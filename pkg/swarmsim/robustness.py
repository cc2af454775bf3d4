# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
"""
Combinatorial robustness of the thresholded communication graph.

A node set S is r-reachable when some member has at least r neighbours outside S;
a graph is r-robust when every pair of nonempty disjoint node sets contains an
r-reachable member set. The exact tests enumerate all 2**n subsets once, so they
are refused above ``ROBUSTNESS_ENUMERATION_LIMIT`` nodes; larger graphs are
certified from lambda2 instead.
"""
import logging
import math
from dataclasses import asdict
from dataclasses import dataclass
from typing import AbstractSet
from typing import Iterable
from typing import Optional
from typing import Tuple

import networkx as nx
import numpy as np

from .exceptions import CapabilityError
from .graph import algebraic_connectivity
from .graph import DEFAULT_EDGE_THRESHOLD
from .graph import laplacian
from .graph import unweighted_laplacian
from .graph import WeightedGraph

log = logging.getLogger("swarmsim.robustness")

ROBUSTNESS_ENUMERATION_LIMIT = 16

NodeSet = AbstractSet[int]


def _as_node_set(nodes: Iterable[int], n: int) -> frozenset:
    members = frozenset(int(i) for i in nodes)
    bad = sorted(i for i in members if not 0 <= i < n)
    if bad:
        raise ValueError(f"Node ids {bad} out of range for n={n}")
    return members


def _check_enumerable(g: WeightedGraph) -> None:
    if g.n > ROBUSTNESS_ENUMERATION_LIMIT:
        raise CapabilityError(
            f"Exact robustness analysis enumerates 2**n subsets and is limited to n <= "
            f"{ROBUSTNESS_ENUMERATION_LIMIT} (got n={g.n}); "
            "use certified_robustness_from_lambda2 for a spectral lower bound"
        )


class _SubsetTable:
    """ Membership and outside-neighbour counts for every subset bitmask of the node set """

    def __init__(self, g: WeightedGraph, threshold: float):
        n = g.n
        self.n = n
        self.masks = np.arange(1 << n, dtype=np.int64)
        self.member = ((self.masks[:, None] >> np.arange(n)) & 1).astype(bool)
        self.size = self.member.sum(axis=1)
        adj = g.adjacency(threshold).astype(np.int32)
        # outside[S, i]: neighbours of i that are not in S
        self.outside = (~self.member).astype(np.int32) @ adj

    def reachable(self, r: int) -> np.ndarray:
        return np.any(self.member & (self.outside >= r), axis=1)

    def has_unreachable_pair(self, r: int) -> bool:
        unreachable = ~self.reachable(r)
        unreachable[0] = False
        # covered[m]: some nonempty subset of m is not r-reachable
        covered = unreachable.copy()
        for b in range(self.n):
            view = covered.reshape(-1, 2, 1 << b)
            view[:, 1, :] |= view[:, 0, :]
        full = (1 << self.n) - 1
        return bool(np.any(unreachable & covered[full ^ self.masks]))


def is_r_reachable(g: WeightedGraph, s: Iterable[int], r: int, threshold: float = DEFAULT_EDGE_THRESHOLD) -> bool:
    members = _as_node_set(s, g.n)
    if not members:
        raise ValueError("r-reachability is defined for nonempty node sets only")
    if r <= 0:
        return True
    adj = g.adjacency(threshold)
    inside = np.zeros(g.n, dtype=bool)
    inside[list(members)] = True
    outside_counts = adj[inside][:, ~inside].sum(axis=1)
    return bool(np.any(outside_counts >= r))


def is_r_robust(g: WeightedGraph, r: int, threshold: float = DEFAULT_EDGE_THRESHOLD) -> bool:
    _check_enumerable(g)
    if r <= 0:
        return True
    return not _SubsetTable(g, threshold).has_unreachable_pair(r)


def max_robustness(g: WeightedGraph, threshold: float = DEFAULT_EDGE_THRESHOLD) -> int:
    """ Largest r for which the graph is r-robust; 0 for a single node """
    _check_enumerable(g)
    if g.n <= 1:
        return 0
    table = _SubsetTable(g, threshold)
    # r-robust implies minimum degree >= r, and no graph exceeds ceil(n/2)
    upper = min(int(g.degrees(threshold).min()), math.ceil(g.n / 2))
    r = 0
    while r < upper and not table.has_unreachable_pair(r + 1):
        r += 1
    log.debug("max robustness of %d-node graph: %d", g.n, r)
    return r


def isoperimetric_number(g: WeightedGraph, threshold: float = DEFAULT_EDGE_THRESHOLD) -> float:
    _check_enumerable(g)
    if g.n <= 1:
        return 0.0
    table = _SubsetTable(g, threshold)
    boundary = np.where(table.member, table.outside, 0).sum(axis=1)
    eligible = (table.size >= 1) & (table.size <= g.n // 2)
    return float(np.min(boundary[eligible] / table.size[eligible]))


def certified_robustness_from_lambda2(lambda2: float) -> int:
    """ Largest r with 2(r - 1) < lambda2 """
    if lambda2 < 0:
        raise ValueError(f"Expected lambda2 >= 0, got {lambda2}")
    return math.ceil(lambda2 / 2 + 1) - 1


def check_f_total(adv: Iterable[int], f: int) -> bool:
    return len(set(adv)) <= f


def check_f_local(g: WeightedGraph, adv: Iterable[int], f: int, threshold: float = DEFAULT_EDGE_THRESHOLD) -> bool:
    """ Every normal node has at most f adversarial neighbours """
    members = _as_node_set(adv, g.n)
    if not members:
        return True
    is_adv = np.zeros(g.n, dtype=bool)
    is_adv[list(members)] = True
    adv_neighbours = g.adjacency(threshold)[:, is_adv].sum(axis=1)
    return bool(np.all(adv_neighbours[~is_adv] <= f))


@dataclass
class RobustnessReport:
    n: int
    threshold: float
    connected: bool
    lambda2: float
    lambda2_unweighted: float
    certified_r: int
    min_degree: int
    vertex_connectivity: int
    exact_r: Optional[int] = None
    isoperimetric: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _lambda2(L: np.ndarray) -> float:
    if L.shape[0] < 2:
        return 0.0
    value, _ = algebraic_connectivity(L)
    return value


def analyze_robustness(
    g: WeightedGraph,
    threshold: float = DEFAULT_EDGE_THRESHOLD,
    exact: bool = False,
) -> RobustnessReport:
    """ Spectral certificate always; exhaustive r and isoperimetric number when ``exact`` is set """
    lambda2_unweighted = _lambda2(unweighted_laplacian(g, threshold))
    nx_graph = g.to_networkx(threshold)
    report = RobustnessReport(
        n=g.n,
        threshold=threshold,
        connected=g.is_connected(threshold),
        lambda2=_lambda2(laplacian(g)),
        lambda2_unweighted=lambda2_unweighted,
        # the certificate holds for the unweighted graph the definitions are stated on
        certified_r=certified_robustness_from_lambda2(lambda2_unweighted),
        min_degree=int(g.degrees(threshold).min()) if g.n else 0,
        vertex_connectivity=int(nx.node_connectivity(nx_graph)) if g.n > 1 else 0,
    )
    if exact:
        report.exact_r = max_robustness(g, threshold)
        report.isoperimetric = isoperimetric_number(g, threshold)
    log.info(
        "Robustness of %d-node graph: lambda2=%.6g certified_r=%d exact_r=%s",
        report.n, report.lambda2, report.certified_r, report.exact_r,
    )
    return report


def robustness_bounds(g: WeightedGraph, threshold: float = DEFAULT_EDGE_THRESHOLD) -> Tuple[float, float]:
    """ (i(G)**2 / (2 d_max), 2 i(G)): the interval the unweighted lambda2 must fall in """
    iso = isoperimetric_number(g, threshold)
    d_max = int(g.degrees(threshold).max()) if g.n else 0
    lower = iso * iso / (2 * d_max) if d_max else 0.0
    return lower, 2 * iso
