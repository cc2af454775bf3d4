# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
"""
Connectivity maintenance by ascent on lambda2.

For a unit Fiedler vector v the derivative of lambda2 with respect to agent i's
position is sum_j (v_i - v_j)**2 dw_ij/dx_i, which only involves agent i's own
links. Below ``lambda_floor`` an agent flies damped ascent along its own gradient
direction, so k_c is an acceleration and k_c / c_d the cruise speed of the ascent;
above it the formation input is kept and the gradient is added with the smallest
gain phi >= 0 that stops the formation input from lowering lambda2.
"""
import logging
from dataclasses import dataclass
from typing import Optional
from typing import Tuple

import numpy as np

from .dynamics import AgentState
from .dynamics import double_integrator_matrices
from .graph import CommParams
from .graph import comm_strength_array
from .graph import pairwise_distances

log = logging.getLogger("swarmsim.control")


@dataclass
class ConnectivityControlParams:
    # lambda2 above 4F certifies (2F+1)-robustness; 8 for F = 2
    lambda_floor: float = 8.0
    phi_max: float = 50.0
    grad_epsilon: float = 1e-9
    k_c: float = 5.0
    c_d: float = 1.0
    # pure phase steers along grad / |grad|; False applies k_c to the raw gradient (1/m)
    normalize_gradient: bool = True

    def __post_init__(self):
        if self.lambda_floor < 0:
            raise ValueError(f"Expected lambda_floor >= 0, got {self.lambda_floor}")
        if self.phi_max <= 0:
            raise ValueError(f"Expected phi_max > 0, got {self.phi_max}")
        if self.grad_epsilon <= 0:
            raise ValueError(f"Expected grad_epsilon > 0, got {self.grad_epsilon}")
        if self.k_c <= 0 or self.c_d < 0:
            raise ValueError(f"Expected k_c > 0 and c_d >= 0, got k_c={self.k_c}, c_d={self.c_d}")


@dataclass(eq=False)
class Lambda2Gradient:
    # (n, d), 1/m
    rows: np.ndarray
    # lambda2 looked repeated; rows are still a supergradient
    degenerate: bool = False

    def __getitem__(self, i) -> np.ndarray:
        return self.rows[i]

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass(eq=False)
class ControlLaw:
    u: np.ndarray
    phi: np.ndarray
    clamped: np.ndarray
    # agents flying pure connectivity control this step
    connectivity_phase: np.ndarray


def comm_strength_gradient(positions: np.ndarray, params: CommParams) -> np.ndarray:
    """ grad[i, j] = dw_ij / dx_i; zero outside the decay band, where the strength is locally flat """
    x = np.asarray(positions, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    dist = pairwise_distances(x)
    band = (dist >= params.rho) & (dist < params.big_r)
    w = comm_strength_array(dist, params)
    scale = np.where(band, params.decay_rate * w / np.where(band, dist, 1.0), 0.0)
    return scale[:, :, None] * diff


def laplacian_position_derivative(positions: np.ndarray, params: CommParams, i: int, axis: int) -> np.ndarray:
    """ dL/dx_{i,axis}; only row and column i and the matching diagonal entries change """
    dw = comm_strength_gradient(positions, params)[i, :, axis]
    n = dw.shape[0]
    out = np.zeros((n, n))
    out[i, :] = -dw
    out[:, i] = -dw
    out[i, i] = dw.sum()
    others = np.arange(n) != i
    out[others, others] += dw[others]
    return out


def grad_lambda2_rows(positions: np.ndarray, fiedler_rows: np.ndarray, params: CommParams) -> np.ndarray:
    """ Row i uses row i of ``fiedler_rows``, which lets every agent use its own Fiedler estimate """
    v = np.asarray(fiedler_rows, dtype=float)
    norm = np.einsum("ij,ij->i", v, v)
    own = v[np.arange(v.shape[0]), np.arange(v.shape[0])]
    sq = (own[:, None] - v) ** 2
    dw = comm_strength_gradient(positions, params)
    rows = np.einsum("ij,ijd->id", sq, dw)
    return np.where(norm[:, None] > 0, rows / np.where(norm > 0, norm, 1.0)[:, None], 0.0)


def grad_lambda2(
    positions: np.ndarray,
    fiedler: np.ndarray,
    params: CommParams,
    gap: Optional[float] = None,
    grad_epsilon: float = 1e-9,
) -> Lambda2Gradient:
    """ d lambda2 / dx_i for every agent.

    ``gap`` is lambda3 - lambda2 when known; a gap under grad_epsilon flags the result.
    """
    v = np.asarray(fiedler, dtype=float)
    rows = grad_lambda2_rows(positions, np.tile(v, (v.shape[0], 1)), params)
    degenerate = gap is not None and gap < grad_epsilon
    if degenerate:
        log.debug("lambda2 gap %.3g below %.3g; returning a supergradient", gap, grad_epsilon)
    return Lambda2Gradient(rows=rows, degenerate=degenerate)


def grad_lambda2_trace(positions: np.ndarray, fiedler: np.ndarray, params: CommParams) -> np.ndarray:
    """ Same gradient through Trace[(v v' / v'v) dL/dx_{i,axis}]; slow, kept as a cross-check """
    x = np.asarray(positions, dtype=float)
    v = np.asarray(fiedler, dtype=float)
    projector = np.outer(v, v) / (v @ v)
    n, d = x.shape
    rows = np.zeros((n, d))
    for i in range(n):
        for axis in range(d):
            rows[i, axis] = np.trace(projector.T @ laplacian_position_derivative(x, params, i, axis))
    return rows


def ascent_direction(grads, params: ConnectivityControlParams) -> np.ndarray:
    """ Row-wise unit gradient, zero where |grad| <= grad_epsilon; the raw gradient when normalisation is off """
    g = np.asarray(grads, dtype=float)
    if not params.normalize_gradient:
        return g
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return np.where(norm > params.grad_epsilon, g / np.where(norm > 0, norm, 1.0), 0.0)


def connectivity_control(grad_i, velocity_i, params: ConnectivityControlParams) -> np.ndarray:
    return params.k_c * ascent_direction(grad_i, params) - params.c_d * np.asarray(velocity_i, dtype=float)


def phi_scale(
    state: AgentState,
    grad_i,
    u_formation_i,
    params: ConnectivityControlParams,
    matrices: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[float, bool]:
    """ Gain on the gradient term and whether it hit phi_max.

    The gradient is lifted into state space as (0, grad) so it acts as an acceleration
    direction: phi = -G'(A x + B u) / (G' B grad), clipped to [0, phi_max].
    """
    grad = np.asarray(grad_i, dtype=float)
    if np.linalg.norm(grad) <= params.grad_epsilon:
        return 0.0, False
    a, b = matrices if matrices is not None else double_integrator_matrices(state.dimension)
    x = np.concatenate([state.position, state.velocity])
    lifted = np.concatenate([np.zeros_like(grad), grad])
    numerator = -lifted @ (a @ x + b @ np.asarray(u_formation_i, dtype=float))
    denominator = lifted @ (b @ grad)
    raw = numerator / denominator
    phi = float(np.clip(raw, 0.0, params.phi_max))
    return phi, bool(raw > params.phi_max)


def combined_control(
    state: AgentState,
    grad_i,
    u_formation_i,
    params: ConnectivityControlParams,
) -> np.ndarray:
    phi, _ = phi_scale(state, grad_i, u_formation_i, params)
    return phi * np.asarray(grad_i, dtype=float) + np.asarray(u_formation_i, dtype=float)


def fleet_phi(grads: np.ndarray, u_formation: np.ndarray, params: ConnectivityControlParams):
    """ phi_scale for every agent; with the lifted gradient A x drops out """
    sq = np.einsum("id,id->i", grads, grads)
    active = np.sqrt(sq) > params.grad_epsilon
    raw = np.where(active, -np.einsum("id,id->i", grads, u_formation) / np.where(active, sq, 1.0), 0.0)
    return np.clip(raw, 0.0, params.phi_max), raw > params.phi_max


def fleet_control_law(
    lambda2_hat: np.ndarray,
    grads: np.ndarray,
    velocities: np.ndarray,
    u_formation: np.ndarray,
    params: ConnectivityControlParams,
) -> ControlLaw:
    """ Per agent: connectivity_control while its lambda2 estimate is at or below the floor, else combined_control """
    pure = np.asarray(lambda2_hat) <= params.lambda_floor
    phi, clamped = fleet_phi(grads, u_formation, params)
    phi = np.where(pure, 0.0, phi)
    clamped = clamped & ~pure
    combined = phi[:, None] * grads + u_formation
    u = np.where(pure[:, None], params.k_c * ascent_direction(grads, params) - params.c_d * velocities, combined)
    return ControlLaw(u=u, phi=phi, clamped=clamped, connectivity_phase=pure)
