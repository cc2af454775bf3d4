# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import csv
import logging

import networkx as nx
import numpy as np
import pytest

from swarmsim.exceptions import EstimatorError
from swarmsim.graph import algebraic_connectivity
from swarmsim.graph import build_comm_graph
from swarmsim.graph import CommParams
from swarmsim.graph import laplacian
from swarmsim.graph import sample_connected_positions
from swarmsim.graph import spectrum
from swarmsim.graph import WeightedGraph
from swarmsim.spectral import deflated_perron
from swarmsim.spectral import detect_count
from swarmsim.spectral import discovery_round
from swarmsim.spectral import DistributedSpectralEstimator
from swarmsim.spectral import estimate_fiedler
from swarmsim.spectral import estimate_lambda2
from swarmsim.spectral import estimate_spectrum
from swarmsim.spectral import matrix_power_round
from swarmsim.spectral import max_consensus_round
from swarmsim.spectral import PowerIterationParams
from swarmsim.spectral import SpectralNodeState
from swarmsim.spectral import TRACE_HEADER
from swarmsim.spectral import write_trace


class TB:
    def __init__(self, seed=0):
        self.log = logging.getLogger("swarmsim.tb")
        self.log.setLevel(logging.DEBUG)
        self.rng = np.random.default_rng(seed)

    def geometric_graph(self, n=20, side=60.0):
        positions = sample_connected_positions(n, side, CommParams(), self.rng, threshold=1e-12)
        return build_comm_graph(positions, CommParams())

    def random_connected(self, count, max_n=20):
        for _ in range(count):
            n = int(self.rng.integers(2, max_n + 1))
            yield self.geometric_graph(n, side=100.0)

    def run_discovery(self, g):
        """ Discovery rounds until every node detected the count; returns the states and per-round history """
        states = [SpectralNodeState.initial(i) for i in range(g.n)]
        history = [states]
        while any(s.n_hat is None for s in states):
            states = discovery_round(states, g)
            for s in states:
                detect_count(s)
            history.append(states)
            assert len(history) <= g.n + 2
        return states, history


def unit(graph):
    return WeightedGraph.from_networkx(graph)


def power_states(g, dp, k):
    states = [SpectralNodeState.initial(i) for i in range(g.n)]
    for _ in range(k):
        states = matrix_power_round(states, g, dp)
    return states


def assembled(states):
    n = len(states)
    rows = np.zeros((n, n))
    for s in states:
        for j, value in s.d_row.items():
            rows[s.node_id, j] = value
    return rows


def test_deflated_perron_path():
    dp = deflated_perron(laplacian(unit(nx.path_graph(3))), 0.2)
    assert dp.valid
    np.testing.assert_allclose(dp.d_matrix @ np.ones(3), np.ones(3))
    eigenvalues = np.sort(np.linalg.eigvalsh(dp.p_matrix))
    np.testing.assert_allclose(eigenvalues, [0.0, 0.4, 0.8], atol=1e-12)
    radius = np.abs(eigenvalues).max()
    assert (1 - radius) / 0.2 == pytest.approx(1.0)


def test_deflated_perron_edgeless():
    dp = deflated_perron(np.zeros((2, 2)), 0.5)
    np.testing.assert_array_equal(dp.d_matrix, np.eye(2))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(dp.p_matrix)), [0.0, 1.0], atol=1e-12)


def test_deflated_perron_step_too_large():
    assert not deflated_perron(laplacian(unit(nx.path_graph(3))), 0.5).valid
    with pytest.raises(ValueError):
        deflated_perron(laplacian(unit(nx.path_graph(3))), 0.0)


def test_deflated_perron_spectrum():
    tb = TB(1)
    for g in tb.random_connected(10):
        L = laplacian(g)
        alpha = 1 / (2 * g.weighted_degrees().max())
        dp = deflated_perron(L, alpha)
        lam = spectrum(L).eigenvalues
        expected = np.sort(np.concatenate([[0.0], 1 - alpha * lam[1:]]))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(dp.p_matrix)), expected, atol=1e-10)


def test_matrix_power_round_path():
    g = unit(nx.path_graph(3))
    dp = deflated_perron(laplacian(g), 0.2)
    states = power_states(g, dp, 1)
    middle = states[1]
    assert middle.k == 1
    assert middle.id_set == (0, 1, 2)
    assert middle.previous_id_set == (1,)
    for j in range(3):
        assert middle.d_row[j] == pytest.approx(dp.d_matrix[1, j])
    assert states[0].id_set == (0, 1)


@pytest.mark.parametrize("k", [1, 3, 10])
def test_distributed_rows_match_matrix_power(k):
    tb = TB(7)
    for g in tb.random_connected(20):
        alpha = 1 / (2 * g.weighted_degrees().max())
        dp = deflated_perron(laplacian(g), alpha)
        d_k = np.linalg.matrix_power(dp.d_matrix, k)
        np.testing.assert_allclose(assembled(power_states(g, dp, k)), d_k, atol=1e-12, rtol=0)
        p_k = np.linalg.matrix_power(dp.p_matrix, k)
        np.testing.assert_allclose(p_k, d_k - 1.0 / g.n, atol=1e-12, rtol=0)


def test_id_sets_grow_monotonically():
    tb = TB(3)
    for g in tb.random_connected(10):
        _, history = tb.run_discovery(g)
        for before, after in zip(history, history[1:]):
            for s0, s1 in zip(before, after):
                assert set(s0.id_set) <= set(s1.id_set)


@pytest.mark.parametrize("graph, node, n, k_star", [
    (nx.path_graph(5), 0, 5, 5),
    (nx.path_graph(5), 2, 5, 3),
    (nx.complete_graph(5), 0, 5, 2),
    (nx.empty_graph(1), 0, 1, 1),
])
def test_detect_count_examples(graph, node, n, k_star):
    tb = TB()
    states, _ = tb.run_discovery(unit(graph))
    assert states[node].n_hat == n
    assert states[node].k_star == k_star


def test_detect_count_waits_for_a_repeat():
    state = SpectralNodeState.initial(0)
    assert detect_count(state) is None


def test_node_count_on_random_graphs():
    tb = TB(5)
    for g in tb.random_connected(20):
        states, _ = tb.run_discovery(g)
        ecc = nx.eccentricity(g.to_networkx(threshold=0.0))
        for s in states:
            assert s.n_hat == g.n
            assert s.k_star <= ecc[s.node_id] + 1


def test_node_count_on_disconnected_graph():
    g = unit(nx.disjoint_union(nx.path_graph(3), nx.path_graph(2)))
    states, _ = TB().run_discovery(g)
    assert [s.n_hat for s in states] == [3, 3, 3, 2, 2]


def test_max_consensus_round():
    g = unit(nx.path_graph(3))
    first = max_consensus_round([3, 1, 2], g)
    np.testing.assert_array_equal(first, [3, 3, 2])
    np.testing.assert_array_equal(max_consensus_round(first, g), [3, 3, 3])
    np.testing.assert_array_equal(max_consensus_round([4, 4, 4], g), [4, 4, 4])
    np.testing.assert_array_equal(max_consensus_round([1, 5, 2, 3], unit(nx.complete_graph(4))), [5, 5, 5, 5])


def test_estimate_lambda2_needs_rounds_and_counts():
    g = unit(nx.path_graph(3))
    dp = deflated_perron(laplacian(g), 0.2)
    initial = [SpectralNodeState.initial(i) for i in range(3)]
    with pytest.raises(EstimatorError):
        estimate_lambda2(initial, 0, g)
    advanced = power_states(g, dp, 1)
    with pytest.raises(EstimatorError):
        estimate_lambda2(advanced, 1, g)
    with pytest.raises(EstimatorError):
        estimate_lambda2(advanced, 2, g)
    with pytest.raises(EstimatorError):
        estimate_fiedler(advanced, g)


def test_estimate_lambda2_after_discovery():
    g = unit(nx.path_graph(3))
    estimator = DistributedSpectralEstimator(g, PowerIterationParams(alpha=0.2))
    states = [s.restart() for s in estimator.discover()]
    dp = deflated_perron(laplacian(g), 0.2)
    for _ in range(40):
        states = matrix_power_round(states, g, dp)
    estimates = estimate_lambda2(states, 40, g)
    assert np.all(estimates <= 1.0 + 1e-9)
    np.testing.assert_allclose(estimates, 1.0, atol=1e-2)
    assert all(s.lambda2_hat == pytest.approx(e) for s, e in zip(states, estimates))


def test_estimate_path_with_fixed_alpha():
    estimate = estimate_spectrum(unit(nx.path_graph(3)), PowerIterationParams(alpha=0.2))
    assert estimate.alpha == 0.2
    np.testing.assert_array_equal(estimate.n_hat, [3, 3, 3])
    np.testing.assert_allclose(estimate.lambda2_hat, 1.0, atol=1e-3)
    assert np.all(estimate.history <= 1.0 + 1e-9)
    assert estimate.history.shape == (estimate.rounds, 3)
    for row in estimate.fiedler_hat:
        assert abs(row @ np.array([1.0, 0.0, -1.0]) / np.sqrt(2)) == pytest.approx(1.0, abs=1e-9)
    assert not estimate.degenerate


def test_estimate_edge():
    estimate = estimate_spectrum(unit(nx.complete_graph(2)), PowerIterationParams(alpha=0.25))
    np.testing.assert_allclose(estimate.lambda2_hat, 2.0, atol=1e-12)
    assert estimate.rounds == 2
    expected = np.array([1.0, -1.0]) / np.sqrt(2)
    for row in estimate.fiedler_hat:
        np.testing.assert_allclose(row, expected, atol=1e-12)


def test_estimate_isolated_nodes():
    estimate = estimate_spectrum(WeightedGraph(np.zeros((2, 2))))
    np.testing.assert_array_equal(estimate.n_hat, [1, 1])
    np.testing.assert_array_equal(estimate.lambda2_hat, [0.0, 0.0])
    assert estimate.rounds == 0
    assert estimate.fiedler_hat is None


def test_default_alpha_from_max_degree():
    g = unit(nx.star_graph(4))
    estimate = estimate_spectrum(g, fiedler=False)
    assert estimate.alpha == pytest.approx(1 / 8)
    assert estimate.fiedler_hat is None


def test_estimate_converges_on_geometric_graphs():
    tb = TB(2024)
    for _ in range(20):
        g = tb.geometric_graph()
        lambda2, _ = algebraic_connectivity(laplacian(g))
        estimate = estimate_spectrum(g, fiedler=False)
        tb.log.info("lambda2=%.6g estimate=%.6g rounds=%d", lambda2, estimate.lambda2_hat[0], estimate.rounds)
        np.testing.assert_array_equal(estimate.lambda2_hat, estimate.lambda2_hat[0])
        assert abs(estimate.lambda2_hat[0] - lambda2) <= 0.05 * lambda2
        # ||P**k|| >= rho(P)**k, so every round estimates from below
        assert np.all(estimate.history <= lambda2 + 1e-9)


def test_estimate_error_shrinks_with_rounds():
    g = unit(nx.path_graph(10))
    lambda2, _ = algebraic_connectivity(laplacian(g))
    estimate = estimate_spectrum(g, PowerIterationParams(k_max=500, rho_tolerance=1e-12), fiedler=False)
    assert estimate.rounds == 500
    early = lambda2 - estimate.history[49, 0]
    late = lambda2 - estimate.history[499, 0]
    assert 0 <= late < early


def test_fiedler_estimate_on_geometric_graphs():
    tb = TB(99)
    checked = 0
    for _ in range(20):
        g = tb.geometric_graph()
        decomposition = spectrum(laplacian(g))
        if decomposition.eigenvalues[2] - decomposition.eigenvalues[1] < 1e-6:
            continue
        exact = decomposition.eigenvectors[:, 1]
        estimate = estimate_spectrum(g)
        assert not estimate.degenerate
        for row in estimate.fiedler_hat:
            assert abs(row @ exact) >= 0.999
        checked += 1
    assert checked >= 15


def test_fiedler_flags_repeated_lambda2():
    estimate = estimate_spectrum(unit(nx.complete_graph(4)))
    assert estimate.degenerate


def test_trace(tmp_path):
    estimate = estimate_spectrum(unit(nx.complete_graph(2)), PowerIterationParams(alpha=0.25), record_trace=True)
    stages = {record.stage for record in estimate.trace}
    assert stages == {"discovery", "power", "fiedler"}
    path = tmp_path / "trace.csv"
    write_trace(estimate.trace, path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == TRACE_HEADER
    assert len(rows) == len(estimate.trace) + 1
    power = [r for r in rows[1:] if r[2] == "power"]
    assert float(power[0][5]) == pytest.approx(2.0)
