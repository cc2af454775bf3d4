# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import csv
import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from .adversary import adversary_broadcast
from .adversary import AdversaryBehavior
from .adversary import select_adversaries
from .consensus import fleet_consensus_control
from .control import fleet_control_law
from .control import grad_lambda2_rows
from .dynamics import AgentState
from .dynamics import ngon_formation
from .dynamics import step_fleet
from .exceptions import NonFiniteStateError
from .graph import build_comm_graph
from .graph import fiedler_pair
from .graph import laplacian
from .graph import sample_connected_positions
from .graph import spectrum
from .graph import WeightedGraph
from .robustness import certified_robustness_from_lambda2
from .scenario import EstimatorMode
from .scenario import MetricsParams
from .scenario import ScenarioConfig
from .scenario import write_config
from .spectral import DistributedSpectralEstimator

log = logging.getLogger("swarmsim.harness")

TIMESERIES_HEADER = ("t", "agent", "x", "y", "vx", "vy", "lambda2", "lambda2_hat")


@dataclass(eq=False)
class TimeSeries:
    """ Per-step record of a run; index k holds the state at t = k dt, before that step's update """
    dt: float
    offsets: np.ndarray
    # adversary id -> attacked axis
    adversaries: Dict[int, int]
    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    lambda2: np.ndarray
    lambda2_hat: np.ndarray
    phi: np.ndarray
    phi_clamped: np.ndarray
    connectivity_phase: np.ndarray
    removed: np.ndarray
    broadcast_positions: np.ndarray
    # displacement of an agent that only receives the decoupled part of the control law
    reference: np.ndarray
    # the update from step k to k + 1 was pure formation control for every normal agent
    hull_checked: np.ndarray
    degenerate: np.ndarray
    staleness: np.ndarray

    @classmethod
    def allocate(cls, steps: int, offsets: np.ndarray, dt: float, adversaries: Optional[Dict[int, int]] = None):
        n, d = offsets.shape
        return cls(
            dt=dt,
            offsets=offsets,
            adversaries=dict(adversaries or {}),
            t=np.arange(steps) * dt,
            positions=np.zeros((steps, n, d)),
            velocities=np.zeros((steps, n, d)),
            lambda2=np.zeros(steps),
            lambda2_hat=np.zeros((steps, n)),
            phi=np.zeros((steps, n)),
            phi_clamped=np.zeros((steps, n), dtype=bool),
            connectivity_phase=np.zeros((steps, n), dtype=bool),
            removed=np.zeros((steps, n), dtype=np.int64),
            broadcast_positions=np.zeros((steps, n, d)),
            reference=np.zeros((steps, d)),
            hull_checked=np.zeros(steps, dtype=bool),
            degenerate=np.zeros(steps, dtype=bool),
            staleness=np.zeros(steps, dtype=np.int64),
        )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n_agents(self) -> int:
        return self.offsets.shape[0]

    @property
    def normal(self) -> np.ndarray:
        mask = np.ones(self.n_agents, dtype=bool)
        mask[list(self.adversaries)] = False
        return mask


@dataclass(eq=False)
class RunResult:
    config: ScenarioConfig
    series: TimeSeries
    summary: Dict[str, Any]
    wall_time: float
    final_graph: WeightedGraph
    estimator_epochs: int = 0


def _to_json(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def compute_metrics(
    series: TimeSeries,
    params: Optional[MetricsParams] = None,
    lambda_floor: float = 8.0,
    wall_time: Optional[float] = None,
) -> Dict[str, Any]:
    params = params or MetricsParams()
    steps = len(series)
    if steps == 0:
        raise ValueError("compute_metrics needs a nonempty series")
    normal = series.normal
    xi = series.positions[:, normal, :] - series.offsets[normal][None, :, :]
    spread = xi.max(axis=1) - xi.min(axis=1)

    transient = min(int(steps * params.transient_fraction), steps - 1)
    settled = series.lambda2[transient:]

    zeta = xi - series.reference[:, None, :]
    lo, hi = zeta.min(axis=1), zeta.max(axis=1)
    tol = params.hull_tolerance
    outside = (zeta[1:] < lo[:-1, None, :] - tol) | (zeta[1:] > hi[:-1, None, :] + tol)
    hull_violations = int(outside[series.hull_checked[:-1]].sum())

    influence = None
    if series.adversaries and normal.any():
        mean_final = series.positions[-1, normal].mean(axis=0)
        influence = min(
            abs(float(mean_final[axis] - series.broadcast_positions[-1, i, axis]))
            for i, axis in series.adversaries.items()
        )

    above = np.flatnonzero(series.lambda2 > lambda_floor)
    first_above = int(above[0]) if above.size else None
    tail = max(int(round(steps * params.settle_fraction)), 2)
    settled_rate = float(np.max(np.abs(np.diff(series.lambda2[-tail:])))) if steps >= 2 else 0.0

    summary = {
        "steps": steps,
        "n_agents": series.n_agents,
        "adversaries": sorted(series.adversaries),
        "final_spread": spread[-1],
        "final_spread_max": float(spread[-1].max()),
        "spread_max_after_transient": spread[transient:].max(axis=0),
        "lambda2_min_after_transient": float(settled.min()),
        "lambda2_mean_after_transient": float(settled.mean()),
        "lambda2_final": float(series.lambda2[-1]),
        "lambda2_first_above_floor_time": None if first_above is None else float(series.t[first_above]),
        "lambda2_min_after_floor": None if first_above is None else float(series.lambda2[first_above:].min()),
        "lambda2_settled_rate": settled_rate,
        "certified_r_min_after_transient": certified_robustness_from_lambda2(max(float(settled.min()), 0.0)),
        "hull_violations": hull_violations,
        "hull_checked_steps": int(series.hull_checked[:-1].sum()),
        "adversary_influence": influence,
        "final_mean_velocity": series.velocities[-1, normal].mean(axis=0),
        "phi_activations": int((series.phi[:, normal] > 0).sum()),
        "phi_clamps": int(series.phi_clamped[:, normal].sum()),
        "connectivity_phase_steps": int(series.connectivity_phase[:, normal].any(axis=1).sum()),
        "degenerate_steps": int(series.degenerate.sum()),
        "removed_samples": int(series.removed[:, normal].sum()),
        "estimator_max_staleness": int(series.staleness.max()),
        "wall_time": wall_time,
    }
    return {k: _to_json(v) for k, v in summary.items()}


def place_adversaries(g: WeightedGraph, config: ScenarioConfig) -> Dict[int, AdversaryBehavior]:
    """ One node per adversary entry, each picked by its own strategy among the nodes still free """
    placed: Dict[int, AdversaryBehavior] = {}
    for k, spec in enumerate(config.adversaries):
        seed = spec.seed if spec.seed is not None else config.seed + k
        (node,) = select_adversaries(
            g, spec.placement, 1, seed=seed, threshold=config.edge_threshold, exclude=placed.keys(),
        )
        placed[node] = spec.behavior
        log.info("Adversary %d (%s placement): %r", node, spec.placement.value, spec.behavior)
    if len(placed) > config.f:
        log.warning("%d adversaries exceed f=%d; no resilience guarantee applies", len(placed), config.f)
    return placed


class _EstimatorEpochs:
    """ Holds the latest distributed estimate and restarts it on schedule or on a topology change """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.estimate = None
        self.epoch_step = 0
        self.topology = None
        self.epochs = 0

    def update(self, k: int, g: WeightedGraph):
        topology = g.adjacency()
        changed = self.topology is not None and not np.array_equal(topology, self.topology)
        if self.estimate is None or changed or k - self.epoch_step >= self.config.estimator_period:
            if changed:
                log.info("Step %d: neighbour sets changed, restarting estimation", k)
            self.estimate = DistributedSpectralEstimator(g, self.config.power_iteration).run()
            self.epoch_step = k
            self.topology = topology
            self.epochs += 1
        staleness = k - self.epoch_step
        if staleness:
            log.debug("Step %d: spectral estimate is %d steps old", k, staleness)
        return self.estimate, staleness


def run_scenario(config: ScenarioConfig) -> RunResult:
    started = time.perf_counter()
    n, dt, steps = config.n_agents, config.dt, config.steps
    rng = np.random.default_rng(config.seed)
    offsets = ngon_formation(n, config.formation_radius).offsets
    d = offsets.shape[1]

    x = sample_connected_positions(n, config.initial_square, config.comm, rng, config.edge_threshold, d)
    v = np.zeros((n, d))
    adversaries = place_adversaries(build_comm_graph(x, config.comm), config)
    normal = np.ones(n, dtype=bool)
    normal[list(adversaries)] = False

    gains = config.consensus_gains()
    conn = config.connectivity
    series = TimeSeries.allocate(steps, offsets, dt, {i: b.axis for i, b in adversaries.items()})
    epochs = _EstimatorEpochs(config) if config.estimator is EstimatorMode.DISTRIBUTED else None
    ref_x = np.zeros((1, d))
    ref_v = np.zeros((1, d))
    agent_logs = [logging.getLogger(f"swarmsim.agent.{i}") for i in range(n)]
    previous_phase = np.zeros(n, dtype=bool)
    log.info(
        "Running %r: n=%d controller=%s f=%d steps=%d dt=%g estimator=%s seed=%d",
        config.name, n, config.controller.value, gains.f_param, steps, dt, config.estimator.value, config.seed,
    )

    for k in range(steps):
        t = k * dt
        g = build_comm_graph(x, config.comm)
        decomposition = spectrum(laplacian(g))
        lambda2, fiedler = fiedler_pair(decomposition)
        gap = decomposition.eigenvalues[2] - decomposition.eigenvalues[1] if n > 2 else np.inf
        if epochs is None:
            lambda2_hat = np.full(n, lambda2)
            fiedler_rows = np.tile(fiedler, (n, 1))
            degenerate = gap < conn.grad_epsilon
            staleness = 0
        else:
            estimate, staleness = epochs.update(k, g)
            lambda2_hat = estimate.lambda2_hat
            fiedler_rows = estimate.fiedler_hat if estimate.fiedler_hat is not None else np.zeros((n, n))
            degenerate = estimate.degenerate

        sent_x = x.copy()
        sent_v = v.copy()
        for i, behavior in adversaries.items():
            sent_x[i], sent_v[i] = adversary_broadcast(behavior, AgentState(i, x[i], v[i], behavior), t, dt)

        v_ref = config.velocity.at(t, d)
        formation = fleet_consensus_control(x, v, offsets, sent_x, sent_v, g.weights, gains, v_ref)
        grads = grad_lambda2_rows(x, fiedler_rows, config.comm)
        law = fleet_control_law(lambda2_hat, grads, v, formation.u, conn)
        for i in np.flatnonzero(law.connectivity_phase != previous_phase):
            agent_logs[i].info(
                "Step %d: %s connectivity phase (lambda2_hat=%.4g, floor=%g)",
                k, "entering" if law.connectivity_phase[i] else "leaving", lambda2_hat[i], conn.lambda_floor,
            )
        previous_phase = law.connectivity_phase

        pure = law.connectivity_phase[normal]
        if pure.all():
            ref_u = -conn.c_d * ref_v
        else:
            ref_u = -gains.kappa * (ref_v - v_ref[None, :])

        series.positions[k] = x
        series.velocities[k] = v
        series.lambda2[k] = lambda2
        series.lambda2_hat[k] = lambda2_hat
        series.phi[k] = law.phi
        series.phi_clamped[k] = law.clamped
        series.connectivity_phase[k] = law.connectivity_phase
        series.removed[k] = formation.removed
        series.broadcast_positions[k] = sent_x
        series.reference[k] = ref_x[0]
        series.hull_checked[k] = not pure.any() and not np.any(law.phi[normal] > 0)
        series.degenerate[k] = degenerate
        series.staleness[k] = staleness
        if np.any(law.clamped):
            log.debug("Step %d: phi clamped at %g for agents %s", k, conn.phi_max, np.flatnonzero(law.clamped).tolist())

        x, v = step_fleet(x, v, law.u, dt, step_index=k)
        ref_x, ref_v = step_fleet(ref_x, ref_v, ref_u, dt, step_index=k)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            bad = np.flatnonzero(~np.all(np.isfinite(np.hstack([x, v])), axis=1)).tolist()
            raise NonFiniteStateError(f"step {k}: non-finite state for agent(s) {bad}")

    wall_time = time.perf_counter() - started
    summary = compute_metrics(series, config.metrics, conn.lambda_floor, wall_time)
    if summary["degenerate_steps"]:
        log.warning("%d steps ran with a repeated lambda2", summary["degenerate_steps"])
    if summary["phi_clamps"]:
        log.warning("phi hit its clamp %d times", summary["phi_clamps"])
    log.info(
        "Finished %r in %.2f s: spread=%s lambda2_min=%.3f hull_violations=%d",
        config.name, wall_time, summary["final_spread"], summary["lambda2_min_after_transient"],
        summary["hull_violations"],
    )
    return RunResult(
        config=config,
        series=series,
        summary=summary,
        wall_time=wall_time,
        final_graph=build_comm_graph(x, config.comm),
        estimator_epochs=0 if epochs is None else epochs.epochs,
    )


def write_timeseries(series: TimeSeries, path: Union[str, os.PathLike]) -> None:
    """ One row per step and agent; floats use repr so reruns are byte-identical """
    n = series.n_agents
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TIMESERIES_HEADER)
        t = series.t.tolist()
        positions = series.positions[:, :, :2].tolist()
        velocities = series.velocities[:, :, :2].tolist()
        lambda2 = series.lambda2.tolist()
        lambda2_hat = series.lambda2_hat.tolist()
        for k in range(len(series)):
            for i in range(n):
                writer.writerow((
                    repr(t[k]), i,
                    repr(positions[k][i][0]), repr(positions[k][i][1]),
                    repr(velocities[k][i][0]), repr(velocities[k][i][1]),
                    repr(lambda2[k]), repr(lambda2_hat[k][i]),
                ))


def write_outputs(result: RunResult, out_dir: Union[str, os.PathLike]) -> Tuple[str, str, str]:
    os.makedirs(out_dir, exist_ok=True)
    timeseries = os.path.join(out_dir, "timeseries.csv")
    summary = os.path.join(out_dir, "summary.json")
    echo = os.path.join(out_dir, "config.echo.json")
    write_timeseries(result.series, timeseries)
    with open(summary, "w") as f:
        json.dump(result.summary, f, indent=2, sort_keys=True)
        f.write("\n")
    write_config(result.config, echo)
    log.info("Wrote %s, %s and %s", timeseries, summary, echo)
    return timeseries, summary, echo
