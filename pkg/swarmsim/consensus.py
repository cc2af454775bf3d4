# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
"""
Second-order consensus on formation-relative positions, with and without W-MSR filtering.

Agent i tracks xi_i = x_i - h_i and the shared reference velocity:

    u_i = -kappa (v_i - v_ref) + sum_j a_ij [(xi_j - xi_i) + gamma_v (v_j - v_i)]

With W-MSR each axis is filtered on its own: among the neighbours' values strictly
above the agent's own the f largest are dropped (all of them when fewer than f), the
same for values strictly below, and the sum runs over what is left. A dropped
neighbour loses both its position and its velocity term on that axis.
"""
import logging
from dataclasses import dataclass
from dataclasses import replace
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from .dynamics import AgentState

log = logging.getLogger("swarmsim.consensus")

FILTER_MODES = ("formation", "raw")


@dataclass
class ConsensusGains:
    kappa: float = 1.0
    gamma_v: float = 1.0
    f_param: int = 0
    # divide the coupling sum by the number of kept neighbours
    normalize: bool = False
    # rank samples by xi = x - h ("formation") or by the broadcast position ("raw")
    filter_on: str = "formation"

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"Expected kappa > 0, got {self.kappa}")
        if self.gamma_v <= 0:
            raise ValueError(f"Expected gamma_v > 0, got {self.gamma_v}")
        if self.f_param < 0:
            raise ValueError(f"Expected f_param >= 0, got {self.f_param}")
        if self.filter_on not in FILTER_MODES:
            raise ValueError(f"Expected filter_on in {FILTER_MODES}, got {self.filter_on!r}")


@dataclass(eq=False)
class NeighborSample:
    neighbor_id: int
    weight: float
    position: np.ndarray
    velocity: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"Expected weight in [0, 1], got {self.weight}")
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.offset = np.asarray(self.offset, dtype=float)

    @property
    def xi(self) -> np.ndarray:
        return self.position - self.offset


@dataclass(eq=False)
class FleetControl:
    u: np.ndarray
    # samples dropped per agent, summed over axes
    removed: np.ndarray


def wmsr_filter(own_value: float, samples: Sequence[Tuple[int, float]], f: int) -> Tuple[List[int], List[int]]:
    """ Split neighbour ids into (kept, removed), both listed in (value, id) order.

    Ties at a removal boundary drop the lower id first. Values equal to own_value are always kept.
    """
    if f < 0:
        raise ValueError(f"Expected f >= 0, got {f}")
    ordered = sorted(((float(v), int(i)) for i, v in samples))
    larger = sorted((s for s in ordered if s[0] > own_value), key=lambda s: (-s[0], s[1]))
    smaller = [s for s in ordered if s[0] < own_value]
    dropped = {i for _, i in larger[:f]} | {i for _, i in smaller[:f]}
    kept = [i for _, i in ordered if i not in dropped]
    removed = [i for _, i in ordered if i in dropped]
    return kept, removed


def wmsr_control(
    own: AgentState,
    own_offset,
    samples: Sequence[NeighborSample],
    gains: ConsensusGains,
    v_ref,
) -> np.ndarray:
    h_i = np.asarray(own_offset, dtype=float)
    xi_i = own.position - h_i
    u = -gains.kappa * (own.velocity - np.asarray(v_ref, dtype=float))
    by_id = {s.neighbor_id: s for s in samples}
    for axis in range(own.dimension):
        if gains.filter_on == "formation":
            own_value = xi_i[axis]
            values = [(s.neighbor_id, s.xi[axis]) for s in samples]
        else:
            own_value = own.position[axis]
            values = [(s.neighbor_id, s.position[axis]) for s in samples]
        kept, removed = wmsr_filter(own_value, values, gains.f_param)
        if removed:
            log.debug("agent %d axis %d drops %s", own.agent_id, axis, removed)
        coupling = 0.0
        for j in kept:
            s = by_id[j]
            coupling += s.weight * ((s.xi[axis] - xi_i[axis]) + gains.gamma_v * (s.velocity[axis] - own.velocity[axis]))
        if gains.normalize and kept:
            coupling /= len(kept)
        u[axis] += coupling
    return u


def linear_consensus_control(
    own: AgentState,
    own_offset,
    samples: Sequence[NeighborSample],
    gains: ConsensusGains,
    v_ref,
) -> np.ndarray:
    return wmsr_control(own, own_offset, samples, replace(gains, f_param=0), v_ref)


def _removal_mask(own: np.ndarray, sent: np.ndarray, neighbours: np.ndarray, f: int) -> np.ndarray:
    n = sent.shape[0]
    if f == 0:
        return np.zeros((n, n), dtype=bool)
    idx = np.arange(n)
    same = sent[:, None] == sent[None, :]
    lower_id = idx[:, None] < idx[None, :]
    # above[k, j]: k comes before j when dropping from the top, below[k, j] from the bottom
    above = (sent[:, None] > sent[None, :]) | (same & lower_id)
    below = (sent[:, None] < sent[None, :]) | (same & lower_id)
    larger = neighbours & (sent[None, :] > own[:, None])
    smaller = neighbours & (sent[None, :] < own[:, None])
    rank_large = larger.astype(np.int64) @ above.astype(np.int64)
    rank_small = smaller.astype(np.int64) @ below.astype(np.int64)
    return (larger & (rank_large < f)) | (smaller & (rank_small < f))


def fleet_consensus_control(
    positions: np.ndarray,
    velocities: np.ndarray,
    offsets: np.ndarray,
    sent_positions: np.ndarray,
    sent_velocities: np.ndarray,
    weights: np.ndarray,
    gains: ConsensusGains,
    v_ref,
    f: Optional[int] = None,
) -> FleetControl:
    """ wmsr_control for every agent from one snapshot.

    Each agent uses its own true state and the broadcasts of the agents it shares a
    positive weight with.
    """
    f = gains.f_param if f is None else f
    n, d = positions.shape
    neighbours = weights > 0
    xi_own = positions - offsets
    xi_sent = sent_positions - offsets
    rank_own = xi_own if gains.filter_on == "formation" else positions
    rank_sent = xi_sent if gains.filter_on == "formation" else sent_positions
    u = -gains.kappa * (velocities - np.asarray(v_ref, dtype=float)[None, :])
    removed = np.zeros(n, dtype=np.int64)
    for axis in range(d):
        dropped = _removal_mask(rank_own[:, axis], rank_sent[:, axis], neighbours, f)
        a = np.where(neighbours & ~dropped, weights, 0.0)
        coupling = (a @ xi_sent[:, axis] - a.sum(axis=1) * xi_own[:, axis]) + gains.gamma_v * (
            a @ sent_velocities[:, axis] - a.sum(axis=1) * velocities[:, axis]
        )
        if gains.normalize:
            count = (a > 0).sum(axis=1)
            coupling = np.where(count > 0, coupling / np.maximum(count, 1), 0.0)
        u[:, axis] += coupling
        removed += dropped.sum(axis=1)
    return FleetControl(u=u, removed=removed)
