# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import json
import logging

import networkx as nx
import numpy as np
import pytest

from swarmsim.exceptions import CapabilityError
from swarmsim.graph import algebraic_connectivity
from swarmsim.graph import unweighted_laplacian
from swarmsim.graph import WeightedGraph
from swarmsim.robustness import analyze_robustness
from swarmsim.robustness import certified_robustness_from_lambda2
from swarmsim.robustness import check_f_local
from swarmsim.robustness import check_f_total
from swarmsim.robustness import is_r_reachable
from swarmsim.robustness import is_r_robust
from swarmsim.robustness import isoperimetric_number
from swarmsim.robustness import max_robustness
from swarmsim.robustness import robustness_bounds


class TB:
    def __init__(self, seed=0):
        self.log = logging.getLogger("swarmsim.tb")
        self.log.setLevel(logging.DEBUG)
        self.rng = np.random.default_rng(seed)

    def connected_graphs(self, count, max_n=10):
        """ Seeded G(n, p) draws, redrawn until connected """
        seed = 0
        while count:
            n = int(self.rng.integers(2, max_n + 1))
            p = float(self.rng.uniform(0.2, 0.9))
            graph = nx.gnp_random_graph(n, p, seed=seed)
            seed += 1
            if nx.is_connected(graph):
                count -= 1
                yield WeightedGraph.from_networkx(graph)


def unit(graph):
    return WeightedGraph.from_networkx(graph)


def unweighted_lambda2(g):
    value, _ = algebraic_connectivity(unweighted_laplacian(g))
    return value


def atlas_graphs():
    for graph in nx.graph_atlas_g():
        if graph.number_of_nodes() >= 2:
            yield graph


@pytest.mark.parametrize("graph, nodes, r, expected", [
    (nx.complete_graph(5), {0, 1}, 3, True),
    (nx.complete_graph(5), {0, 1}, 4, False),
    (nx.cycle_graph(6), {0, 1, 2}, 2, False),
    (nx.cycle_graph(6), {0, 1, 2}, 1, True),
    (nx.cycle_graph(6), {0, 1, 2}, 0, True),
    (nx.path_graph(4), {0, 1, 2, 3}, 1, False),
])
def test_is_r_reachable(graph, nodes, r, expected):
    assert is_r_reachable(unit(graph), nodes, r) is expected


def test_is_r_reachable_rejects_bad_sets():
    g = unit(nx.path_graph(3))
    with pytest.raises(ValueError):
        is_r_reachable(g, set(), 1)
    with pytest.raises(ValueError):
        is_r_reachable(g, {5}, 1)


@pytest.mark.parametrize("graph, r, expected", [
    (nx.complete_graph(5), 3, True),
    (nx.complete_graph(5), 4, False),
    (nx.cycle_graph(6), 1, True),
    (nx.cycle_graph(6), 2, False),
    (nx.path_graph(4), 1, True),
    (nx.path_graph(4), 2, False),
    (nx.disjoint_union(nx.complete_graph(3), nx.complete_graph(3)), 1, False),
    (nx.path_graph(4), 0, True),
])
def test_is_r_robust(graph, r, expected):
    assert is_r_robust(unit(graph), r) is expected


@pytest.mark.parametrize("graph, expected", [
    (nx.complete_graph(5), 3),
    (nx.complete_graph(2), 1),
    (nx.path_graph(4), 1),
    (nx.cycle_graph(6), 1),
    (nx.empty_graph(1), 0),
    (nx.empty_graph(3), 0),
])
def test_max_robustness(graph, expected):
    assert max_robustness(unit(graph)) == expected


def test_threshold_drops_weak_edges():
    g = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 0.005), (0, 2, 0.5)])
    assert max_robustness(g, threshold=0.01) == 1
    assert not is_r_reachable(g, {2}, 2, threshold=0.01)
    assert is_r_reachable(g, {2}, 2, threshold=0.001)


@pytest.mark.parametrize("graph, expected", [
    (nx.complete_graph(2), 1.0),
    (nx.cycle_graph(4), 1.0),
    (nx.disjoint_union(nx.complete_graph(2), nx.complete_graph(2)), 0.0),
    (nx.empty_graph(1), 0.0),
])
def test_isoperimetric_number(graph, expected):
    assert isoperimetric_number(unit(graph)) == pytest.approx(expected)


@pytest.mark.parametrize("lambda2, expected", [
    (8.0, 4),
    (8.5, 5),
    (0.0, 0),
    (0.5, 1),
    (2.0, 1),
    (20.0, 10),
])
def test_certified_robustness_examples(lambda2, expected):
    assert certified_robustness_from_lambda2(lambda2) == expected


def test_certified_robustness_threshold():
    # lambda2 > 4F is exactly what certifies (2F + 1)-robustness
    for f in range(5):
        assert certified_robustness_from_lambda2(4 * f + 1e-6) >= 2 * f + 1
        assert certified_robustness_from_lambda2(4 * f + 0.5) >= 2 * f + 1
        if f:
            assert certified_robustness_from_lambda2(4 * f) < 2 * f + 1
            assert certified_robustness_from_lambda2(4 * f - 0.5) < 2 * f + 1


def test_certified_robustness_negative():
    with pytest.raises(ValueError):
        certified_robustness_from_lambda2(-0.1)


def test_f_total_and_f_local():
    star = unit(nx.star_graph(4))
    assert check_f_total({1, 2}, 2)
    assert not check_f_total({1, 2, 3}, 2)
    assert check_f_local(star, {1, 2}, 2)
    assert not check_f_local(star, {1, 2, 3}, 2)
    # the hub is adversarial: every leaf sees exactly one
    assert check_f_local(star, {0}, 1)
    assert check_f_local(star, set(), 0)


def test_exact_analysis_refused_on_large_graphs():
    g = unit(nx.complete_graph(17))
    with pytest.raises(CapabilityError):
        max_robustness(g)
    with pytest.raises(CapabilityError):
        is_r_robust(g, 2)
    with pytest.raises(CapabilityError):
        isoperimetric_number(g)
    with pytest.raises(CapabilityError):
        analyze_robustness(g, exact=True)
    assert analyze_robustness(g).certified_r == 9


def test_atlas_robustness_bounded_and_monotone():
    tb = TB()
    checked = 0
    for graph in atlas_graphs():
        g = unit(graph)
        r = max_robustness(g)
        degree = min(d for _, d in graph.degree())
        assert r <= degree
        assert r <= nx.node_connectivity(graph)
        assert (r >= 1) == nx.is_connected(graph)
        for candidate in range(1, r + 1):
            assert is_r_robust(g, candidate)
        assert not is_r_robust(g, r + 1)
        # C4 and friends sit exactly on lambda2 = 2(r - 1); keep eigh roundoff off the boundary
        assert certified_robustness_from_lambda2(max(unweighted_lambda2(g) - 1e-9, 0.0)) <= r
        checked += 1
    tb.log.info("checked %d atlas graphs", checked)
    assert checked > 1000


def test_isoperimetric_sandwich_and_robustness():
    tb = TB(42)
    for g in tb.connected_graphs(100):
        lambda2 = unweighted_lambda2(g)
        lower, upper = robustness_bounds(g)
        assert lower - 1e-9 <= lambda2 <= upper + 1e-9
        iso = isoperimetric_number(g)
        for r in range(1, g.n + 1):
            if iso > r - 1:
                assert is_r_robust(g, r)


def test_analyze_robustness_report():
    report = analyze_robustness(unit(nx.complete_graph(5)), exact=True)
    assert report.n == 5
    assert report.connected
    assert report.lambda2 == pytest.approx(5.0)
    assert report.lambda2_unweighted == pytest.approx(5.0)
    assert report.exact_r == 3
    assert report.certified_r == 3
    assert report.certified_r <= report.exact_r
    assert report.min_degree == 4
    assert report.vertex_connectivity == 4
    assert report.isoperimetric == pytest.approx(3.0)
    assert json.loads(json.dumps(report.to_dict()))["exact_r"] == 3


def test_analyze_robustness_without_exact():
    report = analyze_robustness(unit(nx.path_graph(4)))
    assert report.exact_r is None
    assert report.isoperimetric is None
    assert report.certified_r == 1


def test_analyze_robustness_disconnected():
    report = analyze_robustness(unit(nx.disjoint_union(nx.path_graph(2), nx.path_graph(2))), exact=True)
    assert not report.connected
    assert report.lambda2 == pytest.approx(0.0, abs=1e-12)
    assert report.certified_r == 0
    assert report.exact_r == 0
    assert report.vertex_connectivity == 0
