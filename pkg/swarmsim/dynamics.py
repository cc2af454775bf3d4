# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any
from typing import Optional
from typing import Tuple

import numpy as np

from .exceptions import NonFiniteStateError

log = logging.getLogger("swarmsim.dynamics")


class Role(str, Enum):
    NORMAL = "normal"
    ADVERSARY = "adversary"


@dataclass(eq=False)
class AgentState:
    agent_id: int
    position: np.ndarray
    velocity: np.ndarray
    # an AdversaryBehavior for malicious agents; their true motion is unchanged
    behavior: Optional[Any] = None

    def __post_init__(self):
        self.position = np.array(self.position, dtype=float)
        self.velocity = np.array(self.velocity, dtype=float)
        if self.position.ndim != 1 or self.position.shape != self.velocity.shape:
            raise ValueError(
                f"Expected matching 1-d position and velocity, got {self.position.shape} and {self.velocity.shape}"
            )
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise NonFiniteStateError(f"agent {self.agent_id}: non-finite state")

    @property
    def role(self) -> Role:
        return Role.NORMAL if self.behavior is None else Role.ADVERSARY

    @property
    def dimension(self) -> int:
        return self.position.shape[0]


@dataclass(eq=False)
class FormationSpec:
    offsets: np.ndarray

    def __post_init__(self):
        h = np.array(self.offsets, dtype=float)
        if h.ndim != 2:
            raise ValueError(f"Expected an (n, d) array of offsets, got shape {h.shape}")
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        if not np.allclose(h.sum(axis=0), 0.0, atol=1e-9 * scale * max(1, h.shape[0])):
            raise ValueError("Expected formation offsets to sum to zero")
        self.offsets = h

    @property
    def n(self) -> int:
        return self.offsets.shape[0]

    @property
    def dimension(self) -> int:
        return self.offsets.shape[1]


def step(state: AgentState, u, dt: float) -> AgentState:
    """ Semi-implicit Euler: velocity first, then position with the new velocity """
    if dt <= 0:
        raise ValueError(f"Expected dt > 0, got {dt}")
    accel = np.asarray(u, dtype=float)
    if accel.shape != state.velocity.shape:
        raise ValueError(f"Expected acceleration of shape {state.velocity.shape}, got {accel.shape}")
    if not np.all(np.isfinite(accel)):
        raise NonFiniteStateError(f"agent {state.agent_id}: non-finite acceleration {accel}")
    velocity = state.velocity + accel * dt
    position = state.position + velocity * dt
    return AgentState(state.agent_id, position, velocity, state.behavior)


def step_fleet(
    positions: np.ndarray, velocities: np.ndarray, u: np.ndarray, dt: float, step_index: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """ step() for every agent at once; rows are agents """
    if dt <= 0:
        raise ValueError(f"Expected dt > 0, got {dt}")
    bad = np.flatnonzero(~np.all(np.isfinite(u), axis=1))
    if bad.size:
        where = "" if step_index is None else f"step {step_index}: "
        raise NonFiniteStateError(f"{where}non-finite acceleration for agent(s) {bad.tolist()}")
    velocities = velocities + u * dt
    return positions + velocities * dt, velocities


def ngon_formation(n: int, radius: float, dimension: int = 2) -> FormationSpec:
    if n < 3:
        raise ValueError(f"A polygon formation needs n >= 3, got {n}")
    if radius <= 0:
        raise ValueError(f"Expected radius > 0, got {radius}")
    if dimension < 2:
        raise ValueError(f"Expected dimension >= 2, got {dimension}")
    angles = 2 * math.pi * np.arange(n) / n
    offsets = np.zeros((n, dimension))
    offsets[:, 0] = radius * np.cos(angles)
    offsets[:, 1] = radius * np.sin(angles)
    # remove round-off so the offsets are centred
    offsets -= offsets.mean(axis=0)
    return FormationSpec(offsets)


def double_integrator_matrices(dimension: int) -> Tuple[np.ndarray, np.ndarray]:
    """ State (position, velocity): A couples velocity into position, B feeds acceleration into velocity """
    eye = np.eye(dimension)
    zero = np.zeros((dimension, dimension))
    a = np.block([[zero, eye], [zero, zero]])
    b = np.vstack([zero, eye])
    return a, b
